"""Scalars, numeric modes and an exact sparse linear solver.

A scalar is either a ``fractions.Fraction`` (exact mode) or a ``float``
(approximate mode). Fractions are always reduced with a positive
denominator, so equality of exact values is plain ``==``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import SingularSystem

Scalar = Union[Fraction, float]
Point = tuple  # tuple of ints, length d

INF = math.inf


@dataclass(frozen=True)
class NumericMode:
    exact: bool = True
    tol: float = 0.0

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError("tolerance must be non-negative")
        if self.exact and self.tol != 0:
            raise ValueError("exact mode has zero tolerance")

    @classmethod
    def approx(cls, tol: float = 1e-9) -> NumericMode:
        return cls(exact=False, tol=tol)

    @property
    def name(self) -> str:
        return "exact" if self.exact else "approx"

    def coerce(self, value) -> Scalar:
        if self.exact:
            if isinstance(value, float):
                raise TypeError("float value in exact computation")
            return Fraction(value)
        return float(value)


EXACT = NumericMode()


def is_exact(value) -> bool:
    return isinstance(value, (Fraction, int)) and not isinstance(value, bool)


def mode_of(values: Iterable) -> NumericMode:
    """Exact if every value is exact, approximate otherwise."""
    for v in values:
        if not is_exact(v):
            return NumericMode.approx()
    return EXACT


def parse_scalar(text) -> Scalar:
    """Parse ``"3/4"``, ``"2"``, ``3`` as Fraction; ``0.25`` as float."""
    if isinstance(text, float):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    s = str(text).strip()
    if any(c in s for c in ".eE") and "/" not in s:
        return float(s)
    return Fraction(s)


def format_scalar(value) -> Union[str, float, None]:
    """JSON-friendly form: exact values become ``"p/q"`` strings."""
    if value is None:
        return None
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)


def parse_time(value) -> Union[int, float]:
    """Entry times: integers or ``"inf"`` / ``"-inf"``."""
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", "+inf", "infinity"):
            return INF
        if v in ("-inf", "-infinity"):
            return -INF
        return int(v)
    if isinstance(value, float):
        if math.isinf(value):
            return value
        if value.is_integer():
            return int(value)
        raise ValueError(f"non-integer time {value!r}")
    return int(value)


def format_time(t) -> Union[int, str]:
    if isinstance(t, float) and math.isinf(t):
        return "inf" if t > 0 else "-inf"
    return int(t)


def abs_diff(a: Scalar, b: Scalar) -> Scalar:
    return abs(a - b)


def solve_sparse(rows: Sequence[dict], rhs: Sequence[Scalar]) -> list:
    """Solve ``A x = b`` by Gaussian elimination on dict-of-dicts rows.

    Works over Fractions (exact) or floats. ``rows[i]`` maps column index to
    coefficient. The systems we build are M-matrices, so a zero pivot means a
    malformed system; we still search for a usable pivot row before failing.
    """
    n = len(rows)
    a = [dict(r) for r in rows]
    b = list(rhs)
    cols: dict[int, set] = {}
    for i, r in enumerate(a):
        for j in r:
            cols.setdefault(j, set()).add(i)
    perm = list(range(n))  # perm[k] = row holding pivot k
    done = set()
    for k in range(n):
        candidates = [i for i in cols.get(k, ()) if i not in done and a[i].get(k, 0) != 0]
        if not candidates:
            raise SingularSystem(f"no pivot for column {k}")
        p = k if k in candidates else min(candidates)
        done.add(p)
        perm[k] = p
        prow = a[p]
        piv = prow[k]
        for i in list(cols[k]):
            if i in done:
                continue
            f = a[i][k] / piv
            if f == 0:
                continue
            ri = a[i]
            for j, v in prow.items():
                nv = 0 if j == k else ri.get(j, 0) - f * v
                if nv == 0:
                    if j in ri:
                        del ri[j]
                        cols[j].discard(i)
                else:
                    if j not in ri:
                        cols.setdefault(j, set()).add(i)
                    ri[j] = nv
            b[i] = b[i] - f * b[p]
    x = [None] * n
    for k in range(n - 1, -1, -1):
        r = a[perm[k]]
        acc = b[perm[k]]
        for j, v in r.items():
            if j != k:
                acc = acc - v * x[j]
        x[k] = acc / r[k]
    return x
