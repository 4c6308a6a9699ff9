"""Finite-horizon optimal stopping of the simple symmetric random walk."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .barriers import Barrier
from .errors import MissingPayoffValue
from .lattice import as_point, diffuse, neighbors, step_prob
from .numeric import Scalar


class _Lookup:
    """Memoised view of a payoff given as a callable or a mapping."""

    def __init__(self, f, name):
        self.f = f
        self.name = name
        self.cache: dict = {}

    def __call__(self, p):
        try:
            return self.cache[p]
        except KeyError:
            pass
        try:
            v = self.f[p] if isinstance(self.f, Mapping) else self.f(p)
        except KeyError as exc:
            raise MissingPayoffValue(f"payoff {self.name} undefined at {p}") from exc
        self.cache[p] = v
        return v


@dataclass
class PayoffSpec:
    """Reward ``g`` for stopping before the horizon, ``h`` at the horizon."""

    g: object
    h: object
    d: int
    T: int

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("horizon must be non-negative")
        self._g = _Lookup(self.g, "g")
        self._h = _Lookup(self.h, "h")

    def reward(self, t: int, p) -> Scalar:
        return self._h(p) if t == self.T else self._g(p)


@dataclass
class ValueFunction:
    values: dict
    stop_region: set
    T: int
    d: int

    def __call__(self, t: int, p) -> Scalar:
        return self.values[(t, as_point(p, self.d))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"m{i + 1}" for i in range(self.d)] + ["value", "stop"])
        for (t, p), v in sorted(self.values.items()):
            w.writerow([t] + list(p) + [str(v) if isinstance(v, Fraction) else repr(v),
                                        int((t, p) in self.stop_region)])
        return buf.getvalue()


class _CellSet:
    def __init__(self, cells: frozenset):
        self.cells = cells

    def __call__(self, t, m) -> bool:
        return (t, m) in self.cells


class _Constant:
    def __init__(self, value: bool):
        self.value = value

    def __call__(self, t, m) -> bool:
        return self.value


class _Reversed:
    """Stop at t iff ``(T - t, m)`` is outside the continuation set of ``b``."""

    def __init__(self, b: Barrier, T: int):
        self.b = b
        self.T = T

    def __call__(self, t, m) -> bool:
        return not self.b.is_continuation(self.T - t, m)


@dataclass
class StoppingRule:
    """Markov rule: stop at the first t with ``stop(t, Y_t)``, and at ``T`` regardless."""

    stop: Callable[[int, tuple], bool]
    T: int
    description: str = field(default="", compare=False)

    def stops(self, t: int, p: tuple) -> bool:
        return t >= self.T or self.stop(t, p)

    @classmethod
    def from_set(cls, pairs: Iterable, T: int, d: int = 1, description: str = "") -> StoppingRule:
        s = frozenset((int(t), as_point(m, d)) for t, m in pairs)
        return cls(_CellSet(s), T, description or f"set of {len(s)} cells")

    @classmethod
    def never(cls, T: int) -> StoppingRule:
        return cls(_Constant(False), T, "never before T")

    @classmethod
    def immediately(cls, T: int) -> StoppingRule:
        return cls(_Constant(True), T, "stop at 0")


def rule_from_barrier(b: Barrier, T: int) -> StoppingRule:
    """Stop at the first t with ``(T - t, Y_t)`` outside the continuation region of ``b``."""
    return StoppingRule(_Reversed(b, T), T, f"reversed {b.kind} barrier, T={T}")


def _reachable(start: tuple, T: int) -> list:
    layers = [{start}]
    for _ in range(T):
        nxt = set()
        for p in layers[-1]:
            nxt.update(neighbors(p))
        layers.append(nxt)
    return layers


def solve(p: PayoffSpec, start) -> tuple:
    """Backward induction; returns ``(ValueFunction, V(0, start))``.

    Only cells reachable from ``start`` are computed, so no artificial
    boundary condition is needed. Ties go to stopping.
    """
    start = as_point(start, p.d)
    layers = _reachable(start, p.T)
    values, region = {}, set()
    q = None
    for y in layers[p.T]:
        values[(p.T, y)] = p.reward(p.T, y)
        region.add((p.T, y))
    for t in range(p.T - 1, -1, -1):
        for y in layers[t]:
            cont = sum(values[(t + 1, n)] for n in neighbors(y))
            if q is None:
                q = step_prob(p.d) if isinstance(cont, Fraction) else 1.0 / (2 * p.d)
            cont = cont * q
            g = p.reward(t, y)
            if g >= cont:
                values[(t, y)] = g
                region.add((t, y))
            else:
                values[(t, y)] = cont
    vf = ValueFunction(values, region, p.T, p.d)
    return vf, values[(0, start)]


def stopped_position_law(rule: StoppingRule, start, d: int) -> dict:
    """Joint law ``{(tau, Y_tau): mass}`` of a Markov rule from a point or a mass map."""
    if isinstance(start, Mapping):
        alive = dict(start)
    else:
        alive = {as_point(start, d): Fraction(1)}
    out: dict = {}
    for t in range(rule.T + 1):
        moving = {}
        for y, w in alive.items():
            if rule.stops(t, y):
                out[(t, y)] = out.get((t, y), 0) + w
            else:
                moving[y] = w
        if not moving:
            break
        alive = diffuse(moving, d)
    return out


def evaluate_rule(p: PayoffSpec, rule: StoppingRule, start) -> Scalar:
    """Exact ``E[g(Y_tau) 1{tau<T} + h(Y_tau) 1{tau=T}]`` for a Markov rule."""
    if rule.T != p.T:
        raise ValueError("rule and payoff horizons differ")
    law = stopped_position_law(rule, start, p.d)
    acc = 0
    for (t, y), w in law.items():
        acc += w * p.reward(t, y)
    return acc
