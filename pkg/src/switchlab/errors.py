"""Exception hierarchy. Every error raised on bad input derives from SwitchlabError."""


class SwitchlabError(Exception):
    pass


class NegativeWeight(SwitchlabError, ValueError):
    pass


class MassNotOne(SwitchlabError, ValueError):
    pass


class EmptySupport(SwitchlabError, ValueError):
    pass


class DimensionMismatch(SwitchlabError, ValueError):
    pass


class UnsupportedDimension(SwitchlabError, ValueError):
    pass


class OutOfKernelBox(SwitchlabError, ValueError):
    pass


class NonConvergence(SwitchlabError, RuntimeError):
    pass


class SingularSystem(SwitchlabError, RuntimeError):
    pass


class UnboundedContinuation(SwitchlabError, ValueError):
    pass


class WrongKind(SwitchlabError, ValueError):
    pass


class UnboundedProblem(SwitchlabError, ValueError):
    pass


class MissingValue(SwitchlabError, KeyError):
    pass


class MissingPayoffValue(MissingValue):
    pass


class ResourceLimit(SwitchlabError, RuntimeError):
    pass


class ConvexOrderLost(SwitchlabError, ValueError):
    pass


class EmbeddingMismatch(SwitchlabError, RuntimeError):
    def __init__(self, message, max_gap=None):
        super().__init__(message)
        self.max_gap = max_gap


class UsageError(SwitchlabError, ValueError):
    pass
