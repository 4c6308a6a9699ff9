"""Brute-force enumeration oracles, independent of the dynamic-programming pipeline.

Path enumeration is vectorised with numpy: all ``(2d)^T`` step sequences are
materialised as integer arrays and masses are recovered exactly by counting.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .barriers import ROOT, ROST, Barrier
from .errors import ResourceLimit
from .exit_law import stopped_law
from .identities import IdentityReport, potential_fn, _kernel, _root_span, _rost_span
from .kernel import KernelTable
from .lattice import as_point, sub, supnorm
from .measures import LatticeMeasure, dirac, make_measure
from .stopping import StoppingRule, rule_from_barrier, solve, PayoffSpec

MAX_PATHS = 1 << 18
MAX_PAIRS = 1 << 22
MAX_RULES = 1 << 20


def _units(d: int) -> np.ndarray:
    out = []
    for i in range(d):
        for s in (1, -1):
            e = [0] * d
            e[i] = s
            out.append(e)
    return np.array(out, dtype=np.int64)


def enumerate_paths(start, d: int, T: int) -> np.ndarray:
    """Positions of every equiprobable T-step path, shape ``(2d)^T x (T+1) x d``."""
    n = (2 * d) ** T
    if n > MAX_PATHS:
        raise ResourceLimit(f"{n} paths exceeds the enumeration limit")
    start = np.array(as_point(start, d), dtype=np.int64)
    if T == 0:
        return start.reshape(1, 1, d)
    idx = np.array(list(itertools.product(range(2 * d), repeat=T)), dtype=np.int64)
    steps = _units(d)[idx]  # (P, T, d)
    pos = np.concatenate([np.zeros((n, 1, d), dtype=np.int64), np.cumsum(steps, axis=1)], axis=1)
    return pos + start


def first_stop(pos: np.ndarray, stop: Callable[[int, tuple], bool]) -> np.ndarray:
    """Index of the first t with ``stop(t, pos[:, t])``, capped at the path length."""
    P, L, d = pos.shape
    mask = np.zeros((P, L), dtype=bool)
    for t in range(L):
        cells, inv = np.unique(pos[:, t, :], axis=0, return_inverse=True)
        flags = np.array([stop(t, tuple(int(c) for c in row)) for row in cells])
        mask[:, t] = flags[inv.reshape(-1)]
    mask[:, L - 1] = True
    return np.argmax(mask, axis=1)


def _barrier_stop(b: Barrier):
    return lambda t, m: not b.is_continuation(t, m)


def _law_from_rows(rows: np.ndarray, weight: Fraction) -> dict:
    cells, counts = np.unique(rows, axis=0, return_counts=True)
    total = rows.shape[0]
    return {tuple(int(c) for c in cell): weight * Fraction(int(k), total) for cell, k in zip(cells, counts)}


def enumerated_law(lam: LatticeMeasure, stop, T: int) -> dict:
    """Law of the position at the first stop (forced at T) by path enumeration."""
    out: dict = {}
    for x, w in lam.atoms.items():
        pos = enumerate_paths(x, lam.d, T)
        tau = first_stop(pos, stop)
        for p, m in _law_from_rows(pos[np.arange(len(pos)), tau], w).items():
            out[p] = out.get(p, 0) + m
    return out


def _expect_law(law: dict, f) -> Fraction:
    return sum((w * f(p) for p, w in law.items()), Fraction(0))


def _pair_expectation(xs: np.ndarray, wx: Fraction, ys: np.ndarray, wy: Fraction, k: KernelTable):
    """``E a(X - Y)`` over all pairs of rows of two equiprobable position arrays."""
    # Collapse each side to distinct positions with path multiplicities before pairing.
    ux, cx = np.unique(xs, axis=0, return_counts=True)
    uy, cy = np.unique(ys, axis=0, return_counts=True)
    if ux.shape[0] * uy.shape[0] > MAX_PAIRS:
        raise ResourceLimit("too many path pairs")
    diff = (ux[:, None, :] - uy[None, :, :]).reshape(-1, xs.shape[1])
    mult = (cx[:, None] * cy[None, :]).reshape(-1)
    acc: dict = {}
    for row, c in zip(map(tuple, diff.tolist()), mult.tolist()):
        acc[row] = acc.get(row, 0) + c
    scale = wx * wy / (xs.shape[0] * ys.shape[0])
    return sum((scale * c * k.value(z) for z, c in acc.items()), Fraction(0))


def oracle_core(x, y, T: int, k: KernelTable) -> list:
    """``[E a(X_{T-s} - Y_s)]`` over all path pairs."""
    d = k.d
    px, py = enumerate_paths(x, d, T), enumerate_paths(y, d, T)
    return [_pair_expectation(px[:, T - s, :], Fraction(1), py[:, s, :], Fraction(1), k)
            for s in range(T + 1)]


def oracle_rectangle(x: int, y: int, a_lo: int, b_hi: int, T: int) -> tuple:
    from .identities import rectangle_barrier
    b = rectangle_barrier(a_lo, b_hi, T)
    lx = enumerated_law(dirac(x), _barrier_stop(b), T)
    ly = enumerated_law(dirac(y), _barrier_stop(b), T)
    return _expect_law(lx, lambda p: abs(p[0] - y)), _expect_law(ly, lambda p: abs(p[0] - x))


def oracle_interpolation(lam: LatticeMeasure, b: Barrier, y, T: int, k: KernelTable,
                         rule: Optional[StoppingRule] = None) -> list:
    """``F^tau(s) = E a(X_{rho ^ (T - tau ^ s)} - Y_{tau ^ s})`` over all path pairs."""
    d = lam.d
    rule = rule or rule_from_barrier(b, T)
    py = enumerate_paths(y, d, T)
    tau = first_stop(py, rule.stops)
    seq = [Fraction(0)] * (T + 1)
    for x, w in lam.atoms.items():
        px = enumerate_paths(x, d, T)
        rho = first_stop(px, _barrier_stop(b))
        for s in range(T + 1):
            u = np.minimum(tau, s)
            ys = py[np.arange(len(py)), u]
            # X horizon depends on Y's stopped time, so group Y paths by it.
            for uu in np.unique(u):
                sel = ys[u == uu]
                h = np.minimum(rho, T - int(uu))
                xs = px[np.arange(len(px)), h]
                frac = Fraction(int(sel.shape[0]), len(py))
                seq[s] += _pair_expectation(xs, w, sel, frac, k)
    return seq


def oracle_root(lam: LatticeMeasure, b: Barrier, y, T: int, k: KernelTable) -> dict:
    """LHS and tau*-payoff of the Root identity by enumeration (the unbounded exit law is solved)."""
    d = lam.d
    y = as_point(y, d)
    mu_t = enumerated_law(lam, _barrier_stop(b), T)
    mu = stopped_law(lam, b, None).exit_law
    pu, pl = potential_fn(mu, k), potential_fn(lam, k)
    lhs = -_expect_law(mu_t, lambda p: k.value(sub(y, p)))
    py = enumerate_paths(y, d, T)
    tau = first_stop(py, rule_from_barrier(b, T).stops)
    ends = py[np.arange(len(py)), tau]
    rhs = Fraction(0)
    for t in np.unique(tau):
        f = pl if int(t) == T else pu
        rhs += _expect_law(_law_from_rows(ends[tau == t], Fraction(int((tau == t).sum()), len(py))), f)
    return {"lhs": lhs, "rhs": rhs, "F": oracle_interpolation(lam, b, y, T, k)}


def oracle_rost(lam: LatticeMeasure, rost: Barrier, x, T: int, k: KernelTable) -> dict:
    d = lam.d
    x = as_point(x, d)
    mu_t = enumerated_law(lam, _barrier_stop(rost), T)
    mu = stopped_law(lam, rost, None).exit_law
    pu, pl = potential_fn(mu, k), potential_fn(lam, k)
    lhs = pu(x) + _expect_law(mu_t, lambda p: k.value(sub(x, p)))
    ends = enumerated_law(dirac(x, d), rule_from_barrier(rost, T).stops, T)
    rhs = _expect_law(ends, lambda p: pu(p) - pl(p))
    return {"lhs": lhs, "rhs": rhs}


def exhaustive_oracle(fixture: dict, k: Optional[KernelTable] = None) -> IdentityReport:
    """Recompute a fixture's identity by enumeration and compare with the DP pipeline.

    ``fixture`` is a parsed fixture (see ``fixtures.load_fixture``). Horizons
    above 8 raise ``ResourceLimit``.
    """
    from . import identities as ids

    kind = fixture["identity"]
    T = fixture["T"]
    if T > 8:
        raise ResourceLimit("enumeration oracle is limited to T <= 8")
    if kind == "rectangle":
        lo, hi = oracle_rectangle(fixture["x"], fixture["y"], fixture["a"], fixture["b"], T)
        dp = ids.verify_switch_rectangle(fixture["x"], fixture["y"], fixture["a"], fixture["b"], T)
        return IdentityReport.equality("oracle:rectangle", dp.lhs, [dp.rhs[0], lo, hi],
                                       metadata={"T": T})
    if kind == "core":
        d = fixture.get("d", 1)
        x, y = as_point(fixture["x"], d), as_point(fixture["y"], d)
        k = ids._kernel(k, d, supnorm(sub(x, y)) + T)
        dp = ids.verify_core(x, y, T, k)
        seq = oracle_core(x, y, T, k)
        return IdentityReport.equality("oracle:core", dp.lhs, seq, metadata={"T": T, "oracle": seq})
    if kind == "root":
        lam, b, y = fixture["lambda"], fixture["barrier"], as_point(fixture["y"], fixture["lambda"].d)
        k = ids._kernel(k, lam.d, _root_span(lam, b, y, T))
        dp = ids.verify_root_identity(lam, b, y, T, k)
        o = oracle_root(lam, b, y, T, k)
        return IdentityReport.equality("oracle:root", dp.lhs,
                                       [o["lhs"], o["rhs"]] + [-v for v in o["F"]] + dp.rhs,
                                       metadata={"T": T})
    if kind == "rost":
        lam, b, x = fixture["lambda"], fixture["barrier"], as_point(fixture["x"], fixture["lambda"].d)
        k = ids._kernel(k, lam.d, _rost_span(lam, b, x, T))
        dp = ids.verify_rost_identity(lam, b, x, T, k)
        o = oracle_rost(lam, b, x, T, k)
        return IdentityReport.equality("oracle:rost", dp.lhs, [o["lhs"], o["rhs"]] + dp.rhs,
                                       metadata={"T": T})
    raise ValueError(f"no enumeration oracle for identity {kind!r}")


# -- all adapted stopping rules --------------------------------------------------

def count_adapted_rules(T: int, d: int = 1) -> int:
    """Number of stop/continue decision trees of depth T with branching 2d."""
    n = 1
    for _ in range(T):
        n = 1 + n ** (2 * d)
    return n


def adapted_stopping_times(T: int, d: int = 1) -> np.ndarray:
    """Every adapted stopping time as a vector of ``tau`` values over all paths.

    Row i gives tau on each of the ``(2d)^T`` paths (ordered as in
    ``enumerate_paths``). A rule at depth T either stops now or continues and
    picks a sub-rule independently for each first step.
    """
    b = 2 * d
    total = count_adapted_rules(T, d)
    if total > MAX_RULES:
        raise ResourceLimit(f"{total} adapted rules at T={T}, d={d} exceeds the enumeration limit")
    rules = np.zeros((1, 1), dtype=np.int8)
    for depth in range(1, T + 1):
        sub_rules = rules  # (n, b^(depth-1))
        n, width = sub_rules.shape
        grids = np.meshgrid(*[np.arange(n)] * b, indexing="ij")
        combos = [g.reshape(-1) for g in grids]
        cont = np.concatenate([sub_rules[c] for c in combos], axis=1) + 1
        stop = np.zeros((1, width * b), dtype=np.int8)
        rules = np.concatenate([stop, cont.astype(np.int8)], axis=0)
    return rules


def _scaled_int(values: list) -> tuple:
    den = 1
    for v in values:
        den = math.lcm(den, Fraction(v).denominator)
    nums = [int(Fraction(v) * den) for v in values]
    return nums, den


def adapted_rule_check(lam: LatticeMeasure, b: Barrier, y, T: int,
                       k: Optional[KernelTable] = None) -> IdentityReport:
    """Monotonicity of F^tau and F~^tau over every adapted rule, by enumeration.

    Also checks that the best payoff over all adapted rules equals the
    Markov dynamic-programming value and ``U_{mu_T}(y)``. Raises
    ``ResourceLimit`` when the rule count is too large.
    """
    from .exit_law import horizon_laws
    from .identities import _neg_potential

    d = lam.d
    y = as_point(y, d)
    k = _kernel(k, d, _root_span(lam, b, y, T))
    taus = adapted_stopping_times(T, d)
    py = enumerate_paths(y, d, T)
    P = py.shape[0]
    laws = horizon_laws(lam, b, T)
    mu = dict(stopped_law(lam, b, None).exit_law.atoms)
    # V[p, j]: X-side mean kernel at horizon T - j against Y_j on path p.
    # Vinf[p, j]: the same against the unbounded exit law.
    cells = {}
    V = np.zeros((P, T + 1), dtype=object)
    Vinf = np.zeros((P, T + 1), dtype=object)
    for p in range(P):
        for j in range(T + 1):
            yy = tuple(int(c) for c in py[p, j])
            key = (j, yy)
            if key not in cells:
                cells[key] = (_neg_potential(laws[T - j], yy, k), _neg_potential(mu, yy, k))
            V[p, j], Vinf[p, j] = cells[key]
    flat = list(V.reshape(-1)) + list(Vinf.reshape(-1))
    nums, den = _scaled_int(flat)
    # Fall back to Python integers when the scaled values could overflow int64.
    dtype = np.int64 if max(abs(n) for n in nums) * P < 1 << 62 else object
    Vi = np.array(nums[:P * (T + 1)], dtype=dtype).reshape(P, T + 1)
    Vinfi = np.array(nums[P * (T + 1):], dtype=dtype).reshape(P, T + 1)
    rows = np.arange(P)[None, :]
    F = np.zeros((taus.shape[0], T + 1), dtype=dtype)
    Ft = np.zeros_like(F)
    tau = taus.astype(np.int64)
    for s in range(T + 1):
        u = np.minimum(tau, s)
        F[:, s] = Vi[rows, u].sum(axis=1)
        early = tau < s
        Ft[:, s] = np.where(early, Vinfi[rows, u], Vi[rows, u]).sum(axis=1)
    drops = max(int(np.max(F[:, :-1] - F[:, 1:], initial=0)) if T else 0,
                int(np.max(Ft[:, :-1] - Ft[:, 1:], initial=0)) if T else 0)
    # Payoff of tau is -F~(T); its supremum over adapted rules should be the DP value.
    best = Fraction(int(-Ft[:, T].min()), den * P)
    mu_t = stopped_law(lam, b, T).exit_law
    lhs = potential_fn(mu_t, k)(y)
    payoff = PayoffSpec(potential_fn(stopped_law(lam, b, None).exit_law, k), potential_fn(lam, k), d, T)
    _, dp = solve(payoff, y)
    start_gap = int(np.max(np.abs(F[:, 0] - F[0, 0])))
    residual = max(Fraction(max(drops, 0), den * P), abs(best - lhs), abs(dp - lhs),
                   Fraction(start_gap, den * P))
    return IdentityReport("adapted_rules", lhs, [best, dp], residual, 0,
                          {"T": T, "rules": int(taus.shape[0]), "max_drop": Fraction(drops, den * P)})
