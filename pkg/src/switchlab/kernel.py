"""Potential kernels of the simple symmetric random walk.

A kernel is a function ``a`` on Z^d with ``a(z) = -1{z=0} + mean of a over the
2d neighbours of z``. In d = 1 the canonical kernel is ``|z|``. In higher
dimension the canonical values are irrational, so exact work uses synthetic
kernels: exact rational solutions of the same equation on a finite box,
pinned to zero on the boundary.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Optional

import numpy as np
from scipy.stats import binom

from .errors import NonConvergence, OutOfKernelBox, SingularSystem
from .lattice import (as_point, box, canonical_rep, check_dim, diffuse, neighbors,
                      step_prob, supnorm)
from .numeric import Scalar, solve_sparse

CANONICAL_D1 = "CanonicalD1"
CANONICAL_APPROX = "CanonicalApprox"
SYNTHETIC_EXACT = "SyntheticExact"


@dataclass(frozen=True)
class KernelTable:
    """Values of a kernel on the box ``|z|_inf <= radius``.

    Values are stored per symmetry orbit (see ``canonical_rep``). Lookups are
    allowed strictly inside the validity box ``|z|_inf < valid_radius``; the
    one-dimensional canonical kernel has no box (``radius is None``).
    """

    d: int
    flavor: str
    radius: Optional[int]
    valid_radius: Optional[int]
    table: Mapping[tuple, Scalar] = field(default_factory=dict, repr=False)
    errors: Mapping[tuple, float] = field(default_factory=dict, repr=False)
    shift: Scalar = 0

    @property
    def exact(self) -> bool:
        return self.flavor != CANONICAL_APPROX

    def covers(self, z: tuple) -> bool:
        return self.valid_radius is None or supnorm(z) < self.valid_radius

    def value(self, z) -> Scalar:
        z = as_point(z, self.d)
        if not self.covers(z):
            raise OutOfKernelBox(f"{z} outside validity box of radius {self.valid_radius}")
        if self.flavor == CANONICAL_D1:
            return Fraction(abs(z[0])) + self.shift
        return self.table[canonical_rep(z)] + self.shift

    __call__ = value

    def laplace_residual(self, z) -> Scalar:
        """``a(z) - (-1{z=0} + mean_neighbours a)``; zero where the equation holds.

        Needs ``z`` and its neighbours inside the stored box, not just the
        validity box.
        """
        z = as_point(z, self.d)
        raw = self._raw
        avg = sum(raw(n) for n in neighbors(z)) * (step_prob(self.d) if self.exact else 1 / (2 * self.d))
        return raw(z) - (avg - (1 if all(c == 0 for c in z) else 0))

    def _raw(self, z: tuple) -> Scalar:
        if self.flavor == CANONICAL_D1:
            return Fraction(abs(z[0])) + self.shift
        if self.radius is not None and supnorm(z) > self.radius:
            raise OutOfKernelBox(f"{z} outside stored box of radius {self.radius}")
        return self.table[canonical_rep(z)] + self.shift

    def shifted(self, c: Scalar) -> KernelTable:
        """The kernel ``a + c``; satisfies the same Laplace identity."""
        return KernelTable(self.d, self.flavor, self.radius, self.valid_radius, self.table,
                           self.errors, self.shift + c)

    def values(self) -> dict:
        """Full point -> value map on the stored box (not for the unbounded d=1 kernel)."""
        if self.radius is None:
            raise ValueError("unbounded kernel has no finite table")
        return {z: self._raw(z) for z in box(self.d, self.radius)}

    def to_csv(self, radius: Optional[int] = None) -> str:
        r = radius if radius is not None else self.radius
        if r is None:
            raise ValueError("give a radius to export the unbounded kernel")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"z{i + 1}" for i in range(self.d)] + ["value"])
        for z in box(self.d, r):
            v = self._raw(z)
            w.writerow(list(z) + [str(v) if isinstance(v, Fraction) else repr(float(v))])
        return buf.getvalue()


def greens_table(d: int, n: int) -> dict:
    """``G_n(z) = sum_{t<=n} P(Z_t = z | Z_0 = 0)`` for every z, exactly."""
    check_dim(d)
    if n < 0:
        raise ValueError("horizon must be non-negative")
    origin = (0,) * d
    mass = {origin: Fraction(1)}
    g: dict = {}
    for t in range(n + 1):
        for p, w in mass.items():
            g[p] = g.get(p, 0) + w
        if t < n:
            mass = diffuse(mass, d)
    return g


def greens_partial(d: int, z, n: int) -> Fraction:
    z = as_point(z, d)
    return greens_table(d, n).get(z, Fraction(0))


def canonical_d1() -> KernelTable:
    return KernelTable(1, CANONICAL_D1, None, None)


def _one_dim_pmf(t: np.ndarray, k: int) -> np.ndarray:
    k = abs(k)
    ok = ((t + k) % 2 == 0) & (k <= t)
    out = np.zeros(t.shape, dtype=float)
    out[ok] = binom.pmf((t[ok] + k) // 2, t[ok], 0.5)
    return out


def _partial_differences_d2(reps: list, n: int) -> dict:
    # Rotating by 45 degrees splits the planar walk into two independent
    # one-dimensional walks in u = z1 + z2 and v = z1 - z2.
    t = np.arange(n + 1)
    g0 = np.sum(_one_dim_pmf(t, 0) ** 2)
    out = {}
    for z in reps:
        u, v = z[0] + z[1], z[0] - z[1]
        gz = np.sum(_one_dim_pmf(t, u) * _one_dim_pmf(t, v))
        out[z] = float(g0 - gz)
    return out


def _partial_differences_d3(reps: list, ns: list) -> dict:
    """Map n -> {rep: G_n(0) - G_n(rep)} by dense forward iteration."""
    n_max = max(ns)
    size = 2 * n_max + 1
    p = np.zeros((size,) * 3)
    c = n_max
    p[c, c, c] = 1.0
    idx = {z: (c + z[0], c + z[1], c + z[2]) for z in reps}
    acc = {z: 0.0 for z in reps}
    out = {}
    for t in range(n_max + 1):
        for z, i in idx.items():
            acc[z] += p[i]
        if t in ns:
            out[t] = {z: acc[(0, 0, 0)] - acc[z] for z in reps}
        if t == n_max:
            break
        q = np.zeros_like(p)
        q[1:] += p[:-1]
        q[:-1] += p[1:]
        q[:, 1:] += p[:, :-1]
        q[:, :-1] += p[:, 1:]
        q[:, :, 1:] += p[:, :, :-1]
        q[:, :, :-1] += p[:, :, 1:]
        p = q / 6.0
    return out


def kernel_canonical(d: int, radius: int = 4, n_max: Optional[int] = None,
                     order: Optional[float] = None, tol: float = 1e-3) -> KernelTable:
    """Canonical kernel ``a(z) = lim_n G_n(0) - G_n(z)``.

    d = 1 is returned exactly as ``|z|``. For d = 2, 3 the limit is estimated
    from ``G_n`` at ``n`` and ``n/2`` with one Richardson step assuming an
    error of size ``n**-order``; the size of that correction is reported per
    entry in ``errors``.
    """
    check_dim(d)
    if d == 1:
        return canonical_d1()
    if n_max is None:
        n_max = 1 << 16 if d == 2 else 96
    if n_max % 4:
        raise ValueError("n_max must be a multiple of 4")
    if order is None:
        order = 1.0 if d == 2 else 1.5
    if d == 3 and n_max < 2 * radius:
        raise ValueError("n_max too small for the requested radius")
    reps = sorted({canonical_rep(z) for z in box(d, radius)})
    if d == 2:
        fine = _partial_differences_d2(reps, n_max)
        coarse = _partial_differences_d2(reps, n_max // 2)
    else:
        both = _partial_differences_d3(reps, [n_max // 2, n_max])
        fine, coarse = both[n_max], both[n_max // 2]
    factor = 2.0 ** order
    table, errors = {}, {}
    for z in reps:
        extrap = (factor * fine[z] - coarse[z]) / (factor - 1)
        table[z] = extrap
        errors[z] = abs(extrap - fine[z])
    worst = max(errors.values())
    if worst > tol:
        raise NonConvergence(f"extrapolation error {worst:.3g} exceeds tolerance {tol:g}")
    return KernelTable(d, CANONICAL_APPROX, radius, radius, table, errors)


@lru_cache(maxsize=64)
def kernel_synthetic(d: int, radius: int, valid_radius: Optional[int] = None) -> KernelTable:
    """Exact rational kernel on ``|z|_inf <= radius``, zero on the boundary.

    Solves the Laplace identity at every interior point. Unknowns are indexed
    by symmetry orbit, which the unique solution respects.
    """
    check_dim(d)
    if valid_radius is None:
        valid_radius = radius - 1
    if not radius > valid_radius >= 1:
        raise ValueError("need radius > valid_radius >= 1")
    reps = sorted({canonical_rep(z) for z in box(d, radius - 1)}, key=lambda r: (r[0], r))
    index = {r: i for i, r in enumerate(reps)}
    q = step_prob(d)
    rows, rhs = [], []
    for r in reps:
        row = {index[r]: Fraction(1)}
        for n in neighbors(r):
            if supnorm(n) >= radius:
                continue
            j = index[canonical_rep(n)]
            row[j] = row.get(j, 0) - q
        rows.append({j: v for j, v in row.items() if v != 0})
        rhs.append(Fraction(-1) if all(c == 0 for c in r) else Fraction(0))
    try:
        sol = solve_sparse(rows, rhs)
    except SingularSystem as exc:  # pragma: no cover - the system is an M-matrix
        raise SingularSystem(f"internal error building synthetic kernel: {exc}") from exc
    table = {r: sol[index[r]] for r in reps}
    for z in box(d, radius):
        if supnorm(z) == radius:
            table.setdefault(canonical_rep(z), Fraction(0))
    return KernelTable(d, SYNTHETIC_EXACT, radius, valid_radius, table)


def kernel_for(d: int, span: int) -> KernelTable:
    """Default exact kernel whose validity box covers differences up to ``span``."""
    if d == 1:
        return canonical_d1()
    return kernel_synthetic(d, span + 2, span + 1)


def verify_compensator(k: KernelTable, w, n: int):
    """Check ``E[a(Z_n) | Z_0 = w] = a(w) + sum_{l<n} P(Z_l = 0 | Z_0 = w)`` by forward DP."""
    from .identities import IdentityReport

    w = as_point(w, k.d)
    origin = (0,) * k.d
    mass = {w: Fraction(1) if k.exact else 1.0}
    visits = Fraction(0) if k.exact else 0.0
    for _ in range(n):
        visits += mass.get(origin, 0)
        mass = diffuse(mass, k.d)
    for p in mass:
        if not k.covers(p):
            raise OutOfKernelBox(f"walk from {w} reaches {p} outside the kernel box")
    lhs = sum((m * k.value(p) for p, m in mass.items()), Fraction(0) if k.exact else 0.0)
    rhs = k.value(w) + visits
    return IdentityReport.equality("compensator", lhs, [rhs], tolerance=0 if k.exact else 1e-9,
                                   metadata={"w": list(w), "n": n, "kernel": k.flavor})
