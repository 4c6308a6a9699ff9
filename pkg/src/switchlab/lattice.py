"""Integer lattice helpers shared by every module."""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Iterator

from .errors import DimensionMismatch, UnsupportedDimension

SUPPORTED_DIMS = (1, 2, 3)


def check_dim(d: int) -> int:
    if d not in SUPPORTED_DIMS:
        raise UnsupportedDimension(f"dimension {d} not in {SUPPORTED_DIMS}")
    return d


def as_point(p, d: int) -> tuple:
    """Normalize an int (d=1) or a sequence of ints into a d-tuple."""
    if isinstance(p, int) and not isinstance(p, bool):
        p = (p,)
    p = tuple(int(c) for c in p)
    if len(p) != d:
        raise DimensionMismatch(f"point {p} is not {d}-dimensional")
    return p


def sub(a: tuple, b: tuple) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def neg(a: tuple) -> tuple:
    return tuple(-x for x in a)


def supnorm(a: tuple) -> int:
    return max(abs(x) for x in a)


def l1norm(a: tuple) -> int:
    return sum(abs(x) for x in a)


def unit_steps(d: int) -> list:
    steps = []
    for i in range(d):
        for s in (1, -1):
            e = [0] * d
            e[i] = s
            steps.append(tuple(e))
    return steps


_STEPS = {d: unit_steps(d) for d in SUPPORTED_DIMS}


def neighbors(p: tuple) -> list:
    return [add(p, e) for e in _STEPS[len(p)]]


def step_prob(d: int) -> Fraction:
    return Fraction(1, 2 * d)


def box(d: int, radius: int) -> Iterator[tuple]:
    """All points with sup-norm at most ``radius``."""
    return product(range(-radius, radius + 1), repeat=d)


def canonical_rep(p: tuple) -> tuple:
    """Representative of the orbit of ``p`` under sign flips and permutations."""
    return tuple(sorted((abs(x) for x in p), reverse=True))


def diffuse(mass: dict, d: int) -> dict:
    """One step of the simple symmetric random walk applied to a mass map."""
    out: dict = {}
    q = step_prob(d)
    for p, w in mass.items():
        if w == 0:
            continue
        share = w * q if isinstance(w, Fraction) else w / (2 * d)
        for e in _STEPS[d]:
            n = add(p, e)
            out[n] = out.get(n, 0) + share
    return out
