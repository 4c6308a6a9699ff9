"""Exact verification of the switching identities and interpolation functions.

Every check returns an :class:`IdentityReport`. Joint expectations over the
two independent walks X and Y are computed by conditioning on the stopped
state of Y and reading off potentials of the X-side stopped laws.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .barriers import ROOT, ROST, Barrier, make_barrier
from .errors import DimensionMismatch, WrongKind
from .exit_law import horizon_laws, march, stopped_law
from .kernel import KernelTable, kernel_for
from .lattice import as_point, diffuse, l1norm, sub, supnorm
from .measures import LatticeMeasure, dirac, make_measure
from .numeric import Scalar, format_scalar
from .stopping import (PayoffSpec, StoppingRule, evaluate_rule, rule_from_barrier, solve,
                       stopped_position_law)

F = "F"
F_TAU = "F_tau"
F_TAU_SIGMA = "F_tau_sigma"
F_TILDE = "F_tilde"
VARIANTS = (F, F_TAU, F_TAU_SIGMA, F_TILDE)


@dataclass
class IdentityReport:
    name: str
    lhs: Scalar
    rhs: list
    residual: Scalar
    tolerance: Scalar = 0
    metadata: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return self.residual <= self.tolerance

    @property
    def passed(self) -> bool:
        return self.verdict

    @classmethod
    def equality(cls, name, lhs, rhs: Sequence, tolerance=0, metadata=None) -> IdentityReport:
        residual = max((abs(lhs - r) for r in rhs), default=0)
        return cls(name, lhs, list(rhs), residual, tolerance, metadata or {})

    def to_json(self) -> dict:
        return {
            "identity": self.name,
            "lhs": format_scalar(self.lhs),
            "rhs": [format_scalar(r) for r in self.rhs],
            "residual": format_scalar(self.residual),
            "tolerance": format_scalar(self.tolerance),
            "verdict": "pass" if self.verdict else "fail",
            "metadata": _jsonable(self.metadata),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (Fraction, float)):
        return format_scalar(obj)
    return obj


# -- helpers -----------------------------------------------------------------

def _zero(k: KernelTable):
    return Fraction(0) if k.exact else 0.0


def _tol(k: KernelTable, tol):
    if tol is not None:
        return tol
    return 0 if k.exact else 1e-9


def _neg_potential(law: dict, y: tuple, k: KernelTable) -> Scalar:
    """``E a(X - y)`` for X with the given law, i.e. minus the potential at y."""
    acc = _zero(k)
    for x, w in law.items():
        acc += w * k.value(sub(x, y))
    return acc


def _span(centres: Sequence[tuple], radius: int, supports: Sequence) -> int:
    """Largest sup-norm of ``c + step - x`` for c in centres, |step|_1 <= radius."""
    best = 0
    for c in centres:
        for s in supports:
            for x in s:
                best = max(best, supnorm(sub(c, x)))
    return best + radius


def _kernel(k: Optional[KernelTable], d: int, span: int) -> KernelTable:
    if k is None:
        return kernel_for(d, span)
    if k.d != d:
        raise DimensionMismatch("kernel dimension differs from problem dimension")
    return k


def _check_kind(b: Barrier, kind: str):
    if b.kind != kind:
        raise WrongKind(f"expected a {kind} barrier, got {b.kind}")


def potential_fn(m: LatticeMeasure, k: KernelTable):
    """``z -> A.m(z) = -sum_x a(z - x) m({x})`` with memoisation."""
    cache = {}
    atoms = list(m.atoms.items())

    def f(z):
        try:
            return cache[z]
        except KeyError:
            acc = _zero(k)
            for x, w in atoms:
                acc -= w * k.value(sub(z, x))
            cache[z] = acc
            return acc
    return f


# -- rectangle and core identities --------------------------------------------

def rectangle_barrier(a_lo: int, b_hi: int, T: int) -> Barrier:
    return make_barrier(ROOT, 1, {(m,): T for m in range(a_lo + 1, b_hi)})


def verify_switch_rectangle(x: int, y: int, a_lo: int, b_hi: int, T: int) -> IdentityReport:
    """``E^x|X_sigma - y| = E^y|X_sigma - x|`` for the exit time of a space-time rectangle."""
    if not (a_lo < x < b_hi and a_lo < y < b_hi):
        raise ValueError("start points must lie strictly inside the rectangle")
    b = rectangle_barrier(a_lo, b_hi, T)
    from_x = stopped_law(dirac(x), b, T).exit_law
    from_y = stopped_law(dirac(y), b, T).exit_law
    lhs = from_x.expect(lambda p: abs(p[0] - y))
    rhs = from_y.expect(lambda p: abs(p[0] - x))
    return IdentityReport.equality("switch_rectangle", lhs, [rhs],
                                   metadata={"x": x, "y": y, "a": a_lo, "b": b_hi, "T": T})


def _walk_laws(start: tuple, d: int, T: int) -> list:
    laws = [{start: Fraction(1)}]
    for _ in range(T):
        laws.append(diffuse(laws[-1], d))
    return laws


def core_sequence(x, y, T: int, k: KernelTable) -> list:
    """``[E a(X_{T-s} - Y_s) for s in 0..T]`` with X from x and Y from y, no barrier."""
    d = k.d
    x, y = as_point(x, d), as_point(y, d)
    lx, ly = _walk_laws(x, d, T), _walk_laws(y, d, T)
    seq = []
    for s in range(T + 1):
        diff: dict = {}
        for p, wp in lx[T - s].items():
            for q, wq in ly[s].items():
                z = sub(p, q)
                diff[z] = diff.get(z, 0) + wp * wq
        seq.append(sum((w * k.value(z) for z, w in diff.items()), _zero(k)))
    return seq


def verify_core(x, y, T: int, k: Optional[KernelTable] = None, d: int = 1, tol=None) -> IdentityReport:
    """The sequence ``s -> E a(X_{T-s} - Y_s)`` is constant and equals ``E a(x - y + Z_T)``."""
    if k is not None:
        d = k.d
    x, y = as_point(x, d), as_point(y, d)
    k = _kernel(k, d, supnorm(sub(x, y)) + T)
    seq = core_sequence(x, y, T, k)
    oracle = sum((w * k.value(z) for z, w in _walk_laws(sub(x, y), d, T)[T].items()), _zero(k))
    return IdentityReport.equality("core", seq[0], seq[1:] + [oracle], _tol(k, tol),
                                   metadata={"x": list(x), "y": list(y), "T": T,
                                             "kernel": k.flavor, "sequence": seq,
                                             "convolution_oracle": oracle})


# -- interpolating functions ---------------------------------------------------

class _XSide:
    """Potentials of the X-side stopped laws, indexed by horizon (None = infinite)."""

    def __init__(self, laws: list, k: KernelTable, infinite: Optional[dict] = None):
        self.laws = laws
        self.infinite = infinite
        self.k = k
        self.cache: dict = {}

    def mean_kernel(self, h, y) -> Scalar:
        key = (h, y)
        try:
            return self.cache[key]
        except KeyError:
            law = self.infinite if h is None else self.laws[h]
            v = _neg_potential(law, y, self.k)
            self.cache[key] = v
            return v


def _x_side_barrier(lam: LatticeMeasure, b: Barrier, T: int, k: KernelTable, infinite=False):
    laws = horizon_laws(lam, b, T)
    inf_law = dict(stopped_law(lam, b, None).exit_law.atoms) if infinite else None
    return _XSide(laws, k, inf_law)


def _x_side_rule(lam: LatticeMeasure, sigma, T: int, k: KernelTable):
    if isinstance(sigma, Barrier):
        stop = lambda t, m: not sigma.is_continuation(t, m)
    else:
        stop = sigma.stops
    return _XSide(march(dict(lam.atoms), stop, lam.d, T).laws(), k)


def _interpolate(xside: _XSide, ytraj, T: int, tilde: bool = False) -> list:
    """Combine a Y trajectory with X-side laws into the sequence over s = 0..T."""
    zero = _zero(xside.k)
    seq = []
    done = zero  # contribution of Y mass stopped strictly before s
    for s in range(T + 1):
        cur = zero
        for yy, w in ytraj.present[s].items():
            cur += w * xside.mean_kernel(T - s, yy)
        seq.append(done + cur)
        for yy, w in ytraj.stopped[s].items():
            done += w * xside.mean_kernel(None if tilde else T - s, yy)
    return seq


def compute_interpolation(variant: str, lam: LatticeMeasure, y, b: Barrier, T: int,
                          rule: Optional[StoppingRule] = None, sigma=None,
                          k: Optional[KernelTable] = None) -> list:
    """Exact values of an interpolating function at s = 0..T.

    ``F``: the Y rule is the reversed-barrier hitting time.
    ``F_tau``: any Markov rule ``rule`` for Y.
    ``F_tau_sigma``: X stopped by ``sigma`` (a rule or a barrier) instead of ``b``.
    ``F_tilde``: X runs to its unbounded exit time once Y has stopped.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    _check_kind(b, ROOT)
    d = lam.d
    y = as_point(y, d)
    if variant == F:
        rule = rule_from_barrier(b, T)
    elif rule is None:
        raise ValueError(f"variant {variant} needs a stopping rule")
    if rule.T != T:
        raise ValueError("rule horizon differs from T")
    k = _kernel(k, d, _span([y], T, [lam.atoms, b.entries or {(0,) * d: 0}]) + T + 1)
    if variant == F_TAU_SIGMA:
        if sigma is None:
            raise ValueError("F_tau_sigma needs sigma")
        xside = _x_side_rule(lam, sigma, T, k)
    else:
        xside = _x_side_barrier(lam, b, T, k, infinite=(variant == F_TILDE))
    ytraj = march({y: Fraction(1)}, rule.stops, d, T)
    return _interpolate(xside, ytraj, T, tilde=(variant == F_TILDE))


def _root_payoff(lam, mu_inf, k, T):
    return PayoffSpec(potential_fn(mu_inf, k), potential_fn(lam, k), lam.d, T)


def _root_span(lam, b, y, T):
    sup = [lam.atoms, b.entries] if b.entries else [lam.atoms]
    return _span([y], T, sup) + T + 2


def verify_root_identity(lam: LatticeMeasure, b: Barrier, y, T: int,
                         k: Optional[KernelTable] = None, tol=None,
                         corrupt: bool = False) -> IdentityReport:
    """Root switching identity: potential of the horizon-T law, reversed-barrier payoff, DP supremum.

    Also checks that the interpolating function F is constant and starts at
    minus the left-hand side. ``corrupt`` perturbs the horizon-T law (used as
    a negative control).
    """
    _check_kind(b, ROOT)
    d = lam.d
    y = as_point(y, d)
    k = _kernel(k, d, _root_span(lam, b, y, T))
    sl = stopped_law(lam, b, T)
    mu_t = sl.exit_law
    if corrupt:
        mu_t = _corrupted(mu_t)
    mu = stopped_law(lam, b, None).exit_law
    lhs = potential_fn(mu_t, k)(y)
    payoff = _root_payoff(lam, mu, k, T)
    tau_star = rule_from_barrier(b, T)
    rhs1 = evaluate_rule(payoff, tau_star, y)
    _, rhs2 = solve(payoff, y)
    xside = _XSide(sl.trajectory.laws(), k, dict(mu.atoms))
    ytraj = march({y: Fraction(1)}, tau_star.stops, d, T)
    fseq = _interpolate(xside, ytraj, T)
    ftilde = _interpolate(xside, ytraj, T, tilde=True)
    rep = IdentityReport.equality("root", lhs, [rhs1, rhs2], _tol(k, tol),
                                  metadata={"T": T, "y": list(y), "kernel": k.flavor,
                                            "F": fseq, "F_tilde": ftilde})
    f_res = max(abs(v - fseq[0]) for v in fseq)
    ft_res = max(abs(v - fseq[0]) for v in ftilde)
    start_res = abs(fseq[0] + lhs)
    rep.metadata.update(F_constancy_residual=f_res, F_tilde_constancy_residual=ft_res,
                        F0_residual=start_res)
    rep.residual = max(rep.residual, f_res, ft_res, start_res)
    return rep


def _corrupted(m: LatticeMeasure) -> LatticeMeasure:
    pts = m.support
    atoms = dict(m.atoms)
    p = pts[0]
    eps = atoms[p] / 2
    atoms[p] -= eps
    q = tuple(c + 1 for c in pts[-1])
    atoms[q] = atoms.get(q, 0) + eps
    return make_measure(m.d, atoms.items(), mode=m.mode)


def replacement_sites(lam: LatticeMeasure, b: Barrier, laws: Sequence[LatticeMeasure]) -> list:
    """Sites worth checking: barrier sites, supports and their neighbours."""
    from .lattice import neighbors
    base = set(b.entries) | set(lam.atoms)
    for m in laws:
        base |= set(m.atoms)
    out = set(base)
    for p in base:
        out.update(neighbors(p))
    return sorted(out)


def verify_replacement(b: Barrier, lam: LatticeMeasure, T: int,
                       k: Optional[KernelTable] = None, tol=None) -> IdentityReport:
    """``A.mu = A.mu_T`` at every site whose entry time is at most T.

    Sites with entry time beyond T are reported in ``metadata["out_of_scope"]``
    together with whether the equality happens to fail there.
    """
    _check_kind(b, ROOT)
    d = lam.d
    mu_t = stopped_law(lam, b, T).exit_law
    mu = stopped_law(lam, b, None).exit_law
    sites = replacement_sites(lam, b, [mu_t, mu])
    span = max(supnorm(sub(z, x)) for z in sites for x in set(mu.atoms) | set(mu_t.atoms))
    k = _kernel(k, d, span + 1)
    pu, pt = potential_fn(mu, k), potential_fn(mu_t, k)
    residual = _zero(k)
    checked, out_of_scope, violations = [], [], []
    for z in sites:
        diff = abs(pu(z) - pt(z))
        if b.entry(z) <= T:
            checked.append(list(z))
            residual = max(residual, diff)
        else:
            out_of_scope.append(list(z))
            if diff != 0:
                violations.append({"site": list(z), "gap": diff})
    rep = IdentityReport("replacement", _zero(k), [], residual, _tol(k, tol),
                         {"T": T, "checked": checked, "out_of_scope": out_of_scope,
                          "out_of_scope_violations": violations})
    return rep


def verify_monotone(lam: LatticeMeasure, b: Barrier, y, T: int, rules: Sequence[StoppingRule],
                    k: Optional[KernelTable] = None, sigmas: Sequence = (), tol=None) -> IdentityReport:
    """Monotonicity of ``F^tau``, ``F~^tau`` and ``F^tau_sigma`` for each supplied rule.

    Per rule also checks ``F^tau(0) = -A.mu_T(y)``, ``F~^tau(T)`` equal to minus
    the rule's payoff and ``F^tau(T)`` at most that. The residual is the
    largest violation found.
    """
    _check_kind(b, ROOT)
    d = lam.d
    y = as_point(y, d)
    k = _kernel(k, d, _root_span(lam, b, y, T))
    sl = stopped_law(lam, b, T)
    mu = stopped_law(lam, b, None).exit_law
    xside = _XSide(sl.trajectory.laws(), k, dict(mu.atoms))
    sigma_sides = [_x_side_rule(lam, s, T, k) for s in sigmas]
    payoff = _root_payoff(lam, mu, k, T)
    lhs = potential_fn(sl.exit_law, k)(y)
    worst = _zero(k)
    details = []
    for rule in rules:
        ytraj = march({y: Fraction(1)}, rule.stops, d, T)
        f = _interpolate(xside, ytraj, T)
        ft = _interpolate(xside, ytraj, T, tilde=True)
        value = evaluate_rule(payoff, rule, y)
        viol = [_drop(f), _drop(ft), abs(f[0] + lhs), abs(ft[0] + lhs),
                max(_zero(k), f[T] + value), abs(ft[T] + value)]
        for side in sigma_sides:
            viol.append(_drop(_interpolate(side, ytraj, T)))
        worst = max([worst] + viol)
        details.append({"rule": rule.description, "F_tau": f, "F_tilde": ft,
                        "payoff": value, "violation": max(viol)})
    return IdentityReport("monotone", lhs, [], worst, _tol(k, tol),
                          {"T": T, "y": list(y), "rules": len(rules), "sigmas": len(sigmas),
                           "details": details})


def _drop(seq: Sequence) -> Scalar:
    """Largest decrease between consecutive entries (zero if non-decreasing)."""
    worst = seq[0] - seq[0]
    for a, b in zip(seq, seq[1:]):
        if a - b > worst:
            worst = a - b
    return worst


# -- Rost side -------------------------------------------------------------------

def _rost_span(lam, rost, x, T):
    sup = [lam.atoms, rost.entries] if rost.entries else [lam.atoms]
    return _span([x], T, sup) + 2


def verify_symmetry(x, y, T: int, rost: Barrier, sigmas: Sequence[StoppingRule],
                    k: Optional[KernelTable] = None, tol=None) -> IdentityReport:
    """Symmetry inequality between Y stopped at the Rost time and X stopped by sigma.

    For each sigma checks
    ``E_y[a(x - Y_tau) - a(x - Y_{tau^T})] <= E[a(X_sigma - Y_tau) - a(X_sigma - y)]``
    and equality for the reversed Rost rule. Equalities at other sigmas are
    flagged in the metadata, not failed.
    """
    _check_kind(rost, ROST)
    d = rost.d
    x, y = as_point(x, d), as_point(y, d)
    lam = dirac(y, d)
    k = _kernel(k, d, _rost_span(lam, rost, x, T))
    mu = stopped_law(lam, rost, None).exit_law
    mu_t = stopped_law(lam, rost, T).exit_law
    pu, pt = potential_fn(mu, k), potential_fn(mu_t, k)
    lhs = -pu(x) + pt(x)

    def rhs_for(sigma):
        acc = _zero(k)
        for (_, z), w in stopped_position_law(sigma, x, d).items():
            acc += w * (-pu(z) - k.value(sub(z, y)))
        return acc

    star = rule_from_barrier(rost, T)
    rhs_star = rhs_for(star)
    values, coincidences = [], []
    worst = abs(lhs - rhs_star)
    for i, s in enumerate(sigmas):
        r = rhs_for(s)
        values.append(r)
        worst = max(worst, lhs - r)
        if r == lhs:
            coincidences.append(i)
    return IdentityReport("symmetry", lhs, [rhs_star] + values, max(worst, _zero(k)), _tol(k, tol),
                          {"x": list(x), "y": list(y), "T": T, "sigmas": len(sigmas),
                           "equality_coincidences": coincidences})


def verify_rost_identity(lam: LatticeMeasure, rost: Barrier, x, T: int,
                         k: Optional[KernelTable] = None, tol=None) -> IdentityReport:
    """Rost switching identity: potential gap, reversed-barrier payoff, DP supremum."""
    _check_kind(rost, ROST)
    d = lam.d
    x = as_point(x, d)
    k = _kernel(k, d, _rost_span(lam, rost, x, T))
    mu = stopped_law(lam, rost, None).exit_law
    mu_t = stopped_law(lam, rost, T).exit_law
    pu, pt, pl = potential_fn(mu, k), potential_fn(mu_t, k), potential_fn(lam, k)
    lhs = pu(x) - pt(x)
    gap = lambda z: pu(z) - pl(z)
    payoff = PayoffSpec(gap, gap, d, T)
    rhs1 = evaluate_rule(payoff, rule_from_barrier(rost, T), x)
    _, rhs2 = solve(payoff, x)
    return IdentityReport.equality("rost", lhs, [rhs1, rhs2], _tol(k, tol),
                                   metadata={"x": list(x), "T": T, "kernel": k.flavor})
