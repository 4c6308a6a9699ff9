"""Seeded Monte Carlo simulation of stopped walks, cross-checking the exact pipeline.

Random streams use numpy's Philox4x64 counter-based generator. Trials are
split into fixed blocks of ``BLOCK`` walkers; block j of stream s under seed
``seed`` draws from ``Philox(key=seed + s * 2**64).jumped(j)``. Within a block
the draw order is fixed (start uniforms, then one direction per walker per
step, stopped or not), so each trial's outcome is a pure function of
``(seed, stream, trial index)`` whatever the number of workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .barriers import ROOT, ROST, Barrier
from .errors import ResourceLimit
from .exit_law import ABSORBED, StoppedLaw
from .kernel import KernelTable, kernel_for
from .lattice import as_point
from .measures import LatticeMeasure, dirac, make_measure
from .numeric import NumericMode
from .oracle import _units
from .stopping import rule_from_barrier

RNG_ALGORITHM = "Philox4x64-10"
BLOCK = 1 << 14
MAX_STEPS = 1 << 20


@dataclass
class McEstimate:
    estimate: float
    se: float
    n: int
    seed: int
    target: Optional[float] = None

    @property
    def z(self) -> Optional[float]:
        if self.target is None:
            return None
        gap = self.estimate - float(self.target)
        if self.se == 0:
            # Constant samples: exact match up to the float rounding of the target.
            if abs(gap) <= 1e-12 * max(1.0, abs(float(self.target))):
                return 0.0
            return math.copysign(math.inf, gap)
        return gap / self.se

    def within(self, k: float = 4.0) -> bool:
        z = self.z
        return z is not None and abs(z) <= k

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "se": self.se, "n": self.n, "seed": self.seed,
                "target": None if self.target is None else float(self.target), "z": self.z,
                "rng": RNG_ALGORITHM}


def _generator(seed: int, stream: int, block: int) -> np.random.Generator:
    if not 0 <= seed < 1 << 64:
        raise ValueError("seed must fit in 64 unsigned bits")
    bitgen = np.random.Philox(key=seed + (stream << 64))
    return np.random.Generator(bitgen.jumped(block) if block else bitgen)


def _stop_flags(t: int, pos: np.ndarray, stop: Callable) -> np.ndarray:
    cells, inv = np.unique(pos, axis=0, return_inverse=True)
    flags = np.array([stop(t, tuple(int(c) for c in row)) for row in cells], dtype=bool)
    return flags[inv.reshape(-1)]


def _simulate_block(lam: LatticeMeasure, stop: Callable, horizon: Optional[int], gen,
                    size: int, record: Optional[int]):
    d = lam.d
    atoms = sorted(lam.atoms.items())
    cdf = np.cumsum([float(w) for _, w in atoms])
    cdf[-1] = 1.0
    pts = np.array([p for p, _ in atoms], dtype=np.int64).reshape(-1, d)
    pos = pts[np.searchsorted(cdf, gen.random(size), side="right")]
    units = _units(d)
    tau = np.full(size, -1, dtype=np.int64)
    rec = pos.copy() if record is not None else None
    alive = np.ones(size, dtype=bool)
    t = 0
    while True:
        if record is not None and t == record:
            rec = pos.copy()
        if horizon is not None and t == horizon:
            tau[alive] = t
            break
        idx = np.nonzero(alive)[0]
        if idx.size:
            halt = _stop_flags(t, pos[idx], stop)
            tau[idx[halt]] = t
            alive[idx[halt]] = False
        if not alive.any():
            break
        if t >= MAX_STEPS:
            raise ResourceLimit("simulation exceeded the step cap")
        steps = units[gen.integers(0, 2 * d, size=size)]
        pos = pos + steps * alive[:, None]
        t += 1
    if record is not None and t < record:
        rec = pos.copy()
    return tau, pos, rec


def simulate(lam: LatticeMeasure, stop: Callable, horizon: Optional[int], seed: int, n: int,
             stream: int = 0, record: Optional[int] = None):
    """``(tau, final positions, positions at min(tau, record))`` for n walks."""
    if n < 1:
        raise ValueError("need at least one trial")
    taus, ends, recs = [], [], []
    for j in range((n + BLOCK - 1) // BLOCK):
        size = min(BLOCK, n - j * BLOCK)
        tau, pos, rec = _simulate_block(lam, stop, horizon, _generator(seed, stream, j), size, record)
        taus.append(tau)
        ends.append(pos)
        recs.append(rec if rec is not None else pos)
    return np.concatenate(taus), np.concatenate(ends), np.concatenate(recs)


def _barrier_stop(b: Barrier):
    return lambda t, m: not b.is_continuation(t, m)


def simulate_stopped(lam: LatticeMeasure, b: Barrier, horizon: Optional[int], seed: int, n: int,
                     stream: int = 0) -> StoppedLaw:
    """Empirical counterpart of ``exit_law.stopped_law`` from n seeded walks."""
    tau, pos, _ = simulate(lam, _barrier_stop(b), horizon, seed, n, stream)
    joint: dict = {}
    rows = np.concatenate([tau[:, None], pos], axis=1)
    cells, counts = np.unique(rows, axis=0, return_counts=True)
    law: dict = {}
    for row, c in zip(cells, counts):
        t, m = int(row[0]), tuple(int(v) for v in row[1:])
        joint[(t, m)] = c / n
        law[m] = law.get(m, 0) + int(c)
    exit_law = make_measure(lam.d, [(m, c / n) for m, c in law.items()], mode=NumericMode.approx(1e-9))
    return StoppedLaw(exit_law, joint, horizon)


def _estimate(samples: np.ndarray, seed: int, target) -> McEstimate:
    n = samples.size
    if np.all(samples == samples[0]):
        return McEstimate(float(samples[0]), 0.0, n, seed, None if target is None else float(target))
    mean = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(n))
    return McEstimate(mean, se, n, seed, None if target is None else float(target))


def _kernel_array(k: KernelTable, z: np.ndarray) -> np.ndarray:
    if k.flavor == "CanonicalD1":
        return np.abs(z[:, 0]).astype(float) + float(k.shift)
    cells, inv = np.unique(z, axis=0, return_inverse=True)
    vals = np.array([float(k.value(tuple(int(c) for c in row))) for row in cells])
    return vals[inv.reshape(-1)]


def _fn_array(f, pts: np.ndarray) -> np.ndarray:
    cells, inv = np.unique(pts, axis=0, return_inverse=True)
    vals = np.array([float(f(tuple(int(c) for c in row))) for row in cells])
    return vals[inv.reshape(-1)]


def estimate_identity(spec: dict, seed: int, n: int, k: Optional[KernelTable] = None) -> tuple:
    """Monte Carlo estimates ``(lhs, rhs)`` of a fixture's identity, each with its exact target.

    Supported identities: rectangle, core, root, rost. The two sides use
    independent streams 0 and 1.
    """
    from . import identities as ids
    from .runner import run_fixture

    kind = spec["identity"]
    if kind not in ("rectangle", "core", "root", "rost"):
        raise ValueError(f"no Monte Carlo estimator for identity {kind!r}")
    T = spec["T"]
    exact = run_fixture(spec, k)
    if kind == "rectangle":
        from .identities import rectangle_barrier
        b = rectangle_barrier(spec["a"], spec["b"], T)
        x, y = spec["x"], spec["y"]
        _, px, _ = simulate(dirac(x), _barrier_stop(b), T, seed, n, 0)
        _, py, _ = simulate(dirac(y), _barrier_stop(b), T, seed, n, 1)
        lhs = _estimate(np.abs(px[:, 0] - y).astype(float), seed, exact.lhs)
        rhs = _estimate(np.abs(py[:, 0] - x).astype(float), seed, exact.rhs[0])
        return lhs, rhs
    if kind == "core":
        d = spec.get("d", 1)
        x, y = np.array(as_point(spec["x"], d)), np.array(as_point(spec["y"], d))
        kk = k or kernel_for(d, int(np.max(np.abs(x - y))) + T)
        never = lambda t, m: False
        _, px, _ = simulate(dirac(tuple(x), d), never, T, seed, n, 0)
        _, py, _ = simulate(dirac(tuple(y), d), never, T, seed, n, 1)
        lhs = _estimate(_kernel_array(kk, px - y), seed, exact.lhs)
        rhs = _estimate(_kernel_array(kk, x - py), seed, exact.lhs)
        return lhs, rhs
    if kind == "root":
        lam, b = spec["lambda"], spec["barrier"]
        d = lam.d
        y = as_point(spec["y"], d)
        kk = k or ids._kernel(None, d, ids._root_span(lam, b, y, T))
        from .exit_law import stopped_law
        mu = stopped_law(lam, b, None).exit_law
        pu, pl = ids.potential_fn(mu, kk), ids.potential_fn(lam, kk)
        _, px, _ = simulate(lam, _barrier_stop(b), T, seed, n, 0)
        lhs = _estimate(-_kernel_array(kk, px - np.array(y)), seed, exact.lhs)
        tau, py, _ = simulate(dirac(y, d), rule_from_barrier(b, T).stops, T, seed, n, 1)
        vals = np.where(tau < T, _fn_array(pu, py), _fn_array(pl, py))
        rhs = _estimate(vals, seed, exact.rhs[0])
        return lhs, rhs
    if kind == "rost":
        lam, b = spec["lambda"], spec["barrier"]
        d = lam.d
        x = as_point(spec["x"], d)
        kk = k or ids._kernel(None, d, ids._rost_span(lam, b, x, T))
        from .exit_law import stopped_law
        mu = stopped_law(lam, b, None).exit_law
        pu, pl = ids.potential_fn(mu, kk), ids.potential_fn(lam, kk)
        xa = np.array(x)
        _, end, at_t = simulate(lam, _barrier_stop(b), None, seed, n, 0, record=T)
        lhs = _estimate(-_kernel_array(kk, end - xa) + _kernel_array(kk, at_t - xa), seed, exact.lhs)
        _, px, _ = simulate(dirac(x, d), rule_from_barrier(b, T).stops, T, seed, n, 1)
        rhs = _estimate(_fn_array(lambda p: pu(p) - pl(p), px), seed, exact.rhs[0])
    return lhs, rhs
