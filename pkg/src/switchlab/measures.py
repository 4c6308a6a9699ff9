"""Finite-support probability measures on Z^d and their potentials."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import (DimensionMismatch, EmptySupport, MassNotOne, NegativeWeight,
                     UnsupportedDimension)
from .lattice import as_point, check_dim, sub
from .numeric import EXACT, NumericMode, Scalar, format_scalar, is_exact, parse_scalar


@dataclass(frozen=True)
class LatticeMeasure:
    """A probability measure with finitely many atoms.

    ``atoms`` maps d-tuples to weights. Zero-weight atoms are dropped on
    construction; use :func:`make_measure` rather than the constructor.
    """

    d: int
    atoms: Mapping[tuple, Scalar]
    mode: NumericMode = field(default=EXACT, compare=False)

    def __iter__(self):
        return iter(sorted(self.atoms.items()))

    def __getitem__(self, p) -> Scalar:
        return self.atoms.get(as_point(p, self.d), 0)

    @property
    def support(self) -> list:
        return sorted(self.atoms)

    @property
    def total(self) -> Scalar:
        return sum(self.atoms.values(), Fraction(0) if self.mode.exact else 0.0)

    def mean(self) -> tuple:
        zero = Fraction(0) if self.mode.exact else 0.0
        return tuple(sum((w * p[i] for p, w in self.atoms.items()), zero) for i in range(self.d))

    def expect(self, f) -> Scalar:
        zero = Fraction(0) if self.mode.exact else 0.0
        return sum((w * f(p) for p, w in self.atoms.items()), zero)

    def mix(self, other: LatticeMeasure, alpha: Scalar) -> LatticeMeasure:
        """``alpha * self + (1 - alpha) * other``."""
        if other.d != self.d:
            raise DimensionMismatch("mixing measures of different dimension")
        out: dict = {}
        for p, w in self.atoms.items():
            out[p] = out.get(p, 0) + alpha * w
        for p, w in other.atoms.items():
            out[p] = out.get(p, 0) + (1 - alpha) * w
        return make_measure(self.d, out.items(), mode=self.mode if self.mode == other.mode else
                            NumericMode.approx(max(self.mode.tol, other.mode.tol, 1e-12)))

    def to_json(self) -> dict:
        atoms = []
        for p, w in self:
            if isinstance(w, Fraction):
                atoms.append({"x": list(p), "num": w.numerator, "den": w.denominator})
            else:
                atoms.append({"x": list(p), "w": float(w)})
        return {"d": self.d, "atoms": atoms}


def make_measure(d: int, atoms: Iterable, mode: NumericMode | None = None) -> LatticeMeasure:
    """Build a validated measure from ``(point, weight)`` pairs.

    Duplicate points are merged by summation. The total mass is checked, not
    normalised: exact mode needs exactly 1, approximate mode needs |mass-1| <= tol.
    """
    check_dim(d)
    merged: dict = {}
    weights = []
    for p, w in atoms:
        w = parse_scalar(w) if isinstance(w, str) else w
        if isinstance(w, int) and not isinstance(w, bool):
            w = Fraction(w)
        if w < 0:
            raise NegativeWeight(f"negative weight {w} at {p}")
        q = as_point(p, d)
        merged[q] = merged.get(q, 0) + w
        weights.append(w)
    if mode is None:
        mode = EXACT if all(is_exact(w) for w in weights) else NumericMode.approx()
    if mode.exact:
        if not all(is_exact(w) for w in weights):
            raise TypeError("float weight in an exact measure")
        merged = {p: Fraction(w) for p, w in merged.items() if w != 0}
    else:
        merged = {p: float(w) for p, w in merged.items() if w != 0}
    if not merged:
        raise EmptySupport("measure has no atoms with positive weight")
    total = sum(merged.values())
    if mode.exact and total != 1:
        raise MassNotOne(f"total mass {total} != 1")
    if not mode.exact and abs(total - 1) > mode.tol:
        raise MassNotOne(f"total mass {total} deviates from 1 by more than {mode.tol}")
    return LatticeMeasure(d, merged, mode)


def dirac(p, d: int = 1) -> LatticeMeasure:
    return make_measure(d, [(p, 1)])


def measure_from_json(obj: Mapping, mode: NumericMode | None = None) -> LatticeMeasure:
    d = int(obj["d"])
    atoms = []
    for a in obj["atoms"]:
        if "num" in a:
            w = Fraction(int(a["num"]), int(a.get("den", 1)))
        else:
            w = parse_scalar(a["w"])
        atoms.append((a["x"], w))
    return make_measure(d, atoms, mode=mode)


def potential(m: LatticeMeasure, y, k) -> Scalar:
    """``-sum_x a(y - x) m({x})`` for the kernel ``k``.

    With the one-dimensional canonical kernel ``a(z) = |z|`` this is the
    classical potential ``U_m(y) = -E|y - X|``.
    """
    y = as_point(y, m.d)
    if k.d != m.d:
        raise DimensionMismatch("kernel and measure dimensions differ")
    acc = Fraction(0) if m.mode.exact and k.exact else 0.0
    for x, w in m.atoms.items():
        acc -= w * k.value(sub(y, x))
    return acc


def convex_order(lam: LatticeMeasure, mu: LatticeMeasure) -> bool:
    """True iff ``lam`` precedes ``mu`` in convex order (d = 1 only).

    Both potentials are piecewise linear with kinks at atoms, so comparing
    them at the union of supports plus one site beyond each end is enough.
    """
    if lam.d != mu.d:
        raise DimensionMismatch("convex order of measures of different dimension")
    if lam.d != 1:
        raise UnsupportedDimension("convex order is only checked in d = 1")
    tol = max(lam.mode.tol, mu.mode.tol) or 0  # keep exact comparisons free of floats
    if abs(lam.mean()[0] - mu.mean()[0]) > tol:
        return False
    pts = sorted({p[0] for p in lam.atoms} | {p[0] for p in mu.atoms})
    pts = [pts[0] - 1] + pts + [pts[-1] + 1]
    for y in pts:
        ul = -sum(w * abs(y - x[0]) for x, w in lam.atoms.items())
        um = -sum(w * abs(y - x[0]) for x, w in mu.atoms.items())
        if ul < um - tol:
            return False
    return True


__all__ = ["LatticeMeasure", "make_measure", "dirac", "measure_from_json", "potential",
           "convex_order", "format_scalar"]
