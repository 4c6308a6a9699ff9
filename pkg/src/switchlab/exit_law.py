"""Exact law of the walk stopped at a barrier, at finite or infinite horizon."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

from .barriers import Barrier
from .errors import DimensionMismatch, MissingValue, UnboundedProblem
from .lattice import diffuse, neighbors, step_prob
from .measures import LatticeMeasure, make_measure
from .numeric import INF, EXACT, NumericMode, Scalar, solve_sparse

# Time marker for mass attributed by the absorption solve.
ABSORBED = INF


@dataclass
class Trajectory:
    """Forward pass of a stop-then-diffuse recursion up to ``horizon``.

    ``present[t]`` is the mass at time t that was not stopped before t;
    ``stopped[t]`` is the part of it stopped at t. At ``t = horizon`` all
    present mass is stopped.
    """

    d: int
    horizon: int
    present: list
    stopped: list

    def law_at(self, h: int) -> dict:
        """Law of the position at ``min(rho, h)``."""
        out: dict = {}
        for u in range(h):
            for p, w in self.stopped[u].items():
                out[p] = out.get(p, 0) + w
        for p, w in self.present[h].items():
            out[p] = out.get(p, 0) + w
        return out

    def laws(self) -> list:
        """``[law_at(h) for h in 0..horizon]`` computed incrementally."""
        out = []
        acc: dict = {}
        for h in range(self.horizon + 1):
            law = dict(acc)
            for p, w in self.present[h].items():
                law[p] = law.get(p, 0) + w
            out.append(law)
            for p, w in self.stopped[h].items():
                acc[p] = acc.get(p, 0) + w
        return out


def march(initial: Mapping, stop: Callable[[int, tuple], bool], d: int, horizon: int) -> Trajectory:
    """Freeze mass where ``stop(t, m)`` holds, diffuse the rest; repeat to ``horizon``."""
    present, stopped = [], []
    alive = {p: w for p, w in initial.items() if w != 0}
    for t in range(horizon + 1):
        present.append(alive)
        if t == horizon:
            stopped.append(dict(alive))
            break
        frozen, moving = {}, {}
        for p, w in alive.items():
            (frozen if stop(t, p) else moving)[p] = w
        stopped.append(frozen)
        alive = diffuse(moving, d)
    return Trajectory(d, horizon, present, stopped)


@dataclass
class StoppedLaw:
    exit_law: LatticeMeasure
    joint: dict
    horizon: Optional[int]  # None means infinite horizon
    residual: Scalar = 0
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.exit_law.d
        w.writerow(["t"] + [f"m{i + 1}" for i in range(d)] + ["mass"])
        for (t, m), mass in sorted(self.joint.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            tt = "inf" if t == ABSORBED else int(t)
            w.writerow([tt] + list(m) + [str(mass) if isinstance(mass, Fraction) else repr(mass)])
        return buf.getvalue()


def absorb(alive: Mapping, region: set, d: int) -> dict:
    """Exit distribution from ``region`` of the walk started with mass ``alive``.

    Solves ``(I - P)^T g = alive`` for the expected occupation ``g`` of each
    site of the region, then pushes ``g`` one step out of the region.
    """
    sites = sorted(region)
    if not sites:
        return dict(alive)
    index = {m: i for i, m in enumerate(sites)}
    exact = all(isinstance(w, Fraction) for w in alive.values())
    q = step_prob(d) if exact else 1.0 / (2 * d)
    one = Fraction(1) if exact else 1.0
    # Transposed system: row i collects inflow into site i.
    rows = [{i: one} for i in range(len(sites))]
    for m, i in index.items():
        for n in neighbors(m):
            j = index.get(n)
            if j is not None:
                rows[j][i] = rows[j].get(i, 0) - q
    rhs = [alive.get(m, 0 * one) for m in sites]
    g = solve_sparse(rows, rhs)
    out: dict = {}
    for m, i in index.items():
        if g[i] == 0:
            continue
        for n in neighbors(m):
            if n not in index:
                out[n] = out.get(n, 0) + g[i] * q
    for m, w in alive.items():
        if m not in index and w != 0:
            out[m] = out.get(m, 0) + w
    return out


def stopped_law(lam: LatticeMeasure, b: Barrier, horizon: Optional[int] = None) -> StoppedLaw:
    """Law of the walk started at ``lam`` and stopped on leaving ``b``.

    Finite horizon T gives the law of the position at ``min(rho, T)``; the
    joint map has keys ``(t, m)`` with time T holding everything still alive.
    ``horizon=None`` runs the recursion until the continuation region stops
    changing and finishes with an exact absorption solve, recorded under the
    time marker ``ABSORBED``.
    """
    if lam.d != b.d:
        raise DimensionMismatch("measure and barrier dimensions differ")
    stop = lambda t, m: not b.is_continuation(t, m)
    initial = dict(lam.atoms)
    if horizon is not None:
        traj = march(initial, stop, lam.d, horizon)
        joint = {}
        for t, frozen in enumerate(traj.stopped):
            for m, w in frozen.items():
                joint[(t, m)] = w
        law = traj.law_at(horizon)
        return StoppedLaw(make_measure(lam.d, law.items(), mode=lam.mode), joint, horizon,
                          trajectory=traj)
    if not b.is_bounded():
        raise UnboundedProblem("infinite horizon needs a bounded continuation region")
    t_star = b.settle_time()
    traj = march(initial, stop, lam.d, t_star)
    joint = {}
    for t in range(t_star):
        for m, w in traj.stopped[t].items():
            joint[(t, m)] = w
    region = b.homogeneous_sites()
    last = traj.present[t_star]
    alive = {m: w for m, w in last.items() if not stop(t_star, m)}
    for m, w in last.items():
        if m not in alive:
            joint[(t_star, m)] = w
    absorbed = absorb(alive, region, lam.d)
    for m, w in absorbed.items():
        joint[(ABSORBED, m)] = w
    law: dict = {}
    for (_, m), w in joint.items():
        law[m] = law.get(m, 0) + w
    return StoppedLaw(make_measure(lam.d, law.items(), mode=lam.mode), joint, None, trajectory=traj)


def horizon_laws(lam: LatticeMeasure, b: Barrier, horizon: int) -> list:
    """Laws of the stopped position at every horizon ``0..horizon`` from one pass."""
    stop = lambda t, m: not b.is_continuation(t, m)
    return march(dict(lam.atoms), stop, lam.d, horizon).laws()


def expectation(s: StoppedLaw, f) -> Scalar:
    """``sum_m f(m) * exit_law({m})``; ``f`` may be a callable or a mapping."""
    m = s.exit_law
    acc = Fraction(0) if m.mode.exact else 0.0
    for p, w in m.atoms.items():
        try:
            v = f[p] if isinstance(f, Mapping) else f(p)
        except KeyError as exc:
            raise MissingValue(f"no value at {p}") from exc
        acc += w * v
    return acc
