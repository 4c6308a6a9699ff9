"""Refinement study: discretise continuum measures, build Root barriers, tabulate the identity.

The grid at refinement N has spacing ``1/sqrt(N)`` and time step ``1/N``;
lattice points are stored as integers ``j`` standing for ``j / sqrt(N)``.
N must be a perfect square so the grid is rational and everything stays exact.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .barriers import ROOT, Barrier, make_barrier
from .errors import ConvexOrderLost, EmbeddingMismatch
from .exit_law import stopped_law
from .kernel import canonical_d1
from .measures import LatticeMeasure, convex_order, make_measure, potential
from .numeric import INF, Scalar, format_scalar
from .stopping import PayoffSpec, evaluate_rule, rule_from_barrier, solve


@dataclass
class ContinuumSpec:
    """Mixture of point masses ``(x, w)`` and uniform laws ``(a, b, w)`` on the line."""

    atoms: list = field(default_factory=list)
    uniforms: list = field(default_factory=list)

    def __post_init__(self):
        self.atoms = [(Fraction(x), Fraction(w)) for x, w in self.atoms]
        self.uniforms = [(Fraction(a), Fraction(b), Fraction(w)) for a, b, w in self.uniforms]
        for a, b, w in self.uniforms:
            if not a < b:
                raise ValueError("uniform component needs a < b")
        if any(w < 0 for _, w in self.atoms) or any(w < 0 for *_, w in self.uniforms):
            raise ValueError("negative weight")
        if self.total != 1:
            raise ValueError(f"total mass {self.total} != 1")

    @property
    def total(self) -> Fraction:
        return sum((w for _, w in self.atoms), Fraction(0)) + sum((w for *_, w in self.uniforms), Fraction(0))

    def mean(self) -> Fraction:
        return (sum((x * w for x, w in self.atoms), Fraction(0))
                + sum(((a + b) / 2 * w for a, b, w in self.uniforms), Fraction(0)))

    def cdf(self, x: Fraction) -> Fraction:
        acc = sum((w for p, w in self.atoms if p <= x), Fraction(0))
        for a, b, w in self.uniforms:
            acc += w * min(max((x - a) / (b - a), Fraction(0)), Fraction(1))
        return acc

    def breakpoints(self) -> list:
        pts = {p for p, _ in self.atoms}
        for a, b, _ in self.uniforms:
            pts.update((a, b))
        return sorted(pts)

    def to_json(self) -> dict:
        return {"atoms": [[str(x), str(w)] for x, w in self.atoms],
                "uniforms": [[str(a), str(b), str(w)] for a, b, w in self.uniforms]}

    @classmethod
    def from_json(cls, obj: dict) -> ContinuumSpec:
        return cls([tuple(a) for a in obj.get("atoms", [])], [tuple(u) for u in obj.get("uniforms", [])])


def dirac_spec(x=0) -> ContinuumSpec:
    return ContinuumSpec(atoms=[(x, 1)])


def uniform_spec(a=-1, b=1) -> ContinuumSpec:
    return ContinuumSpec(uniforms=[(a, b, 1)])


def grid_scale(N: int) -> int:
    s = math.isqrt(N)
    if N < 1 or s * s != N:
        raise ValueError(f"refinement N={N} must be a positive perfect square")
    return s


def _hat_integral(j: int, A: Fraction, B: Fraction) -> Fraction:
    """``int_A^B max(0, 1 - |u - j|) du``."""
    total = Fraction(0)
    lo, hi = max(A, Fraction(j - 1)), min(B, Fraction(j))
    if lo < hi:  # rising side u - j + 1
        total += ((hi - j + 1) ** 2 - (lo - j + 1) ** 2) / 2
    lo, hi = max(A, Fraction(j)), min(B, Fraction(j + 1))
    if lo < hi:  # falling side j + 1 - u
        total += ((j + 1 - lo) ** 2 - (j + 1 - hi) ** 2) / 2
    return total


def hat_projection(spec: ContinuumSpec, N: int) -> LatticeMeasure:
    """Project onto the grid with hat functions; preserves mass and mean exactly."""
    s = grid_scale(N)
    out: dict = {}
    for x, w in spec.atoms:
        u = x * s
        j = math.floor(u)
        f = u - j
        out[j] = out.get(j, 0) + w * (1 - f)
        out[j + 1] = out.get(j + 1, 0) + w * f
    for a, b, w in spec.uniforms:
        A, B = a * s, b * s
        dens = w / (B - A)
        for j in range(math.floor(A), math.ceil(B) + 1):
            m = dens * _hat_integral(j, A, B)
            if m:
                out[j] = out.get(j, 0) + m
    return make_measure(1, [((j,), w) for j, w in out.items()])


def discretize_measure(spec: ContinuumSpec, N: int, partner: Optional[LatticeMeasure] = None,
                       partner_is_lambda: bool = True) -> LatticeMeasure:
    """Hat projection at refinement N, with a convex-order check against ``partner``."""
    m = hat_projection(spec, N)
    if partner is not None:
        lam, mu = (partner, m) if partner_is_lambda else (m, partner)
        if not convex_order(lam, mu):
            raise ConvexOrderLost(f"discretised measures not in convex order at N={N}")
    return m


def wasserstein1(m: LatticeMeasure, spec: ContinuumSpec, N: int) -> Fraction:
    """Exact W1 distance between grid measure ``m`` (spacing 1/sqrt N) and the continuum law."""
    s = grid_scale(N)
    pts = sorted({Fraction(p[0], s) for p in m.atoms} | set(spec.breakpoints()))
    grid = {Fraction(p[0], s): w for p, w in m.atoms.items()}

    def cdf_m(x):
        return sum((w for p, w in grid.items() if p <= x), Fraction(0))

    total = Fraction(0)
    for lo, hi in zip(pts, pts[1:]):
        # On (lo, hi) the grid CDF is flat and the continuum CDF is affine.
        level = cdf_m(lo)
        total += _abs_affine_integral(level - spec.cdf(lo), level - _cdf_left(spec, hi), hi - lo)
    return total


def _cdf_left(spec: ContinuumSpec, x: Fraction) -> Fraction:
    acc = sum((w for p, w in spec.atoms if p < x), Fraction(0))
    for a, b, w in spec.uniforms:
        acc += w * min(max((x - a) / (b - a), Fraction(0)), Fraction(1))
    return acc


def _abs_affine_integral(f0: Fraction, f1: Fraction, length: Fraction) -> Fraction:
    """``int_0^L |f|`` for f affine from f0 to f1."""
    if f0 >= 0 and f1 >= 0 or f0 <= 0 and f1 <= 0:
        return abs(f0 + f1) / 2 * length
    root = f0 / (f0 - f1) * length
    return abs(f0) / 2 * root + abs(f1) / 2 * (length - root)


# -- barrier construction ------------------------------------------------------------

def _potential_table(m: LatticeMeasure, sites: range) -> dict:
    k = canonical_d1()
    return {x: potential(m, (x,), k) for x in sites}


def obstacle_barrier(lam: LatticeMeasure, mu: LatticeMeasure, window: int) -> Barrier:
    """Root barrier from ``u_{t+1} = max(U_mu, mean of u_t over neighbours)``, ``u_0 = U_lam``.

    ``r(x)`` is the first t with ``u_t(x) = U_mu(x)``, or infinity if that
    does not happen for t <= window. Outside the hull of both supports the
    potentials agree, so those sites get ``r = 0`` (the default).
    """
    pts = [p[0] for p in lam.atoms] + [p[0] for p in mu.atoms]
    lo, hi = min(pts) - 1, max(pts) + 1
    sites = range(lo, hi + 1)
    umu = _potential_table(mu, sites)
    u = _potential_table(lam, sites)
    r = {x: 0 for x in sites if u[x] == umu[x]}
    for t in range(1, window + 1):
        if len(r) == len(sites):
            break
        nxt = {}
        for x in sites:
            if x in (lo, hi):
                nxt[x] = umu[x]  # the endpoints sit in the region where the potentials agree
                continue
            nxt[x] = max(umu[x], (u[x - 1] + u[x + 1]) / 2)
        u = nxt
        for x in sites:
            if x not in r and u[x] == umu[x]:
                r[x] = t
    entries = {(x,): r.get(x, INF) for x in sites}
    return make_barrier(ROOT, 1, {m: t for m, t in entries.items() if t != 0})


def _max_potential_gap(a: LatticeMeasure, b: LatticeMeasure) -> Fraction:
    k = canonical_d1()
    pts = [p[0] for p in a.atoms] + [p[0] for p in b.atoms]
    return max(abs(potential(a, (x,), k) - potential(b, (x,), k)) for x in range(min(pts) - 1, max(pts) + 2))


def construct_root_barrier(lam: LatticeMeasure, mu: LatticeMeasure, window: int = 64,
                           max_window: int = 1 << 14) -> Barrier:
    """Obstacle-iteration barrier, accepted only if its exit law is exactly ``mu``.

    The iteration window doubles until the embedding check passes or
    ``max_window`` is exceeded, in which case ``EmbeddingMismatch`` reports
    the largest potential gap seen.
    """
    if not convex_order(lam, mu):
        raise ConvexOrderLost("target is not in convex order with the start law")
    gap = None
    while window <= max_window:
        b = obstacle_barrier(lam, mu, window)
        got = stopped_law(lam, b, None).exit_law
        if got.atoms == mu.atoms:
            return b
        gap = _max_potential_gap(got, mu)
        window *= 2
    raise EmbeddingMismatch(f"barrier exit law differs from target (max potential gap {gap})", gap)


def embeddable_target(lam: LatticeMeasure, mu_hat: LatticeMeasure, window: int) -> LatticeMeasure:
    """Exit law of the obstacle barrier built for ``mu_hat``: a target the walk can embed exactly."""
    return stopped_law(lam, obstacle_barrier(lam, mu_hat, window), None).exit_law


# -- convergence table ------------------------------------------------------------------

@dataclass
class ScalingRow:
    N: int
    value_lhs: Scalar
    value_rhs: Scalar
    residual: Scalar
    delta: Optional[Scalar]
    w1_target: Optional[Fraction] = None
    w1_embedded: Optional[Fraction] = None
    barrier_sites: int = 0

    def to_json(self) -> dict:
        return {k: (format_scalar(v) if isinstance(v, (Fraction, float)) else v)
                for k, v in self.__dict__.items()}


def scaled_point(x, N: int) -> int:
    s = grid_scale(N)
    u = Fraction(x) * s
    if u.denominator != 1:
        raise ValueError(f"x={x} is not a grid point at N={N}")
    return int(u)


def scaled_horizon(T, N: int) -> int:
    h = Fraction(T) * N
    if h.denominator != 1:
        raise ValueError(f"N*T must be an integer (N={N}, T={T})")
    return int(h)


def scaling_row(lam_spec: ContinuumSpec, mu_spec: ContinuumSpec, T, x, N: int,
                window: Optional[int] = None) -> tuple:
    """One refinement: returns ``(ScalingRow, barrier, lambda_N, mu_N)`` with delta unset."""
    s = grid_scale(N)
    lam = discretize_measure(lam_spec, N)
    mu_hat = discretize_measure(mu_spec, N, partner=lam)
    window = window or 16 * N
    mu = embeddable_target(lam, mu_hat, window)
    b = construct_root_barrier(lam, mu, window=window, max_window=64 * window)
    steps = scaled_horizon(T, N)
    xs = scaled_point(x, N)
    k = canonical_d1()
    mu_t = stopped_law(lam, b, steps).exit_law
    lhs = potential(mu_t, (xs,), k)
    payoff = PayoffSpec(lambda p: potential(mu, p, k), lambda p: potential(lam, p, k), 1, steps)
    rhs1 = evaluate_rule(payoff, rule_from_barrier(b, steps), (xs,))
    _, rhs2 = solve(payoff, (xs,))
    residual = max(abs(lhs - rhs1), abs(lhs - rhs2))
    row = ScalingRow(N, lhs / s, rhs2 / s, residual, None,
                     w1_target=wasserstein1(mu_hat, mu_spec, N),
                     w1_embedded=wasserstein1(mu, mu_spec, N),
                     barrier_sites=len(b.entries))
    return row, b, lam, mu


def convergence_table(lam_spec: ContinuumSpec, mu_spec: ContinuumSpec, T, x, Ns: Sequence[int]) -> list:
    """Rows ordered by N with successive differences of the rescaled value."""
    rows = []
    prev = None
    for N in sorted(Ns):
        row, *_ = scaling_row(lam_spec, mu_spec, T, x, N)
        row.delta = None if prev is None else row.value_lhs - prev
        prev = row.value_lhs
        rows.append(row)
    return rows


def cauchy_trend(rows: Sequence[ScalingRow]) -> bool:
    """``|delta|`` does not increase over the last two refinements."""
    deltas = [r.delta for r in rows if r.delta is not None]
    if len(deltas) < 2:
        return True
    return abs(deltas[-1]) <= abs(deltas[-2])


def table_csv(rows: Sequence[ScalingRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "lhs", "rhs", "residual", "delta", "w1_target", "w1_embedded"])
    for r in rows:
        w.writerow([r.N, float(r.value_lhs), float(r.value_rhs), str(r.residual),
                    "" if r.delta is None else float(r.delta),
                    "" if r.w1_target is None else float(r.w1_target),
                    "" if r.w1_embedded is None else float(r.w1_embedded)])
    return buf.getvalue()
