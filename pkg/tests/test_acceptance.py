"""Acceptance criteria 1 to 10, each at its stated fixture count and tolerance.

Every test prints one ``[PASS]`` or ``[FAIL]`` line; the lines are also
collected into the pytest terminal summary. Fixtures come from fixed seeds so
a run is reproducible.
"""
import random
import time

import pytest

from switchlab.exit_law import stopped_law
from switchlab.fixtures import (random_measure, random_root_barrier, random_rost_barrier, random_rule,
                                sharpness_barrier)
from switchlab.identities import (verify_core, verify_monotone, verify_replacement,
                                  verify_root_identity, verify_rost_identity, verify_switch_rectangle,
                                  verify_symmetry, _root_span)
from switchlab.kernel import canonical_d1, kernel_canonical, kernel_synthetic, verify_compensator
from switchlab.lattice import box, supnorm
from switchlab.measures import dirac
from switchlab.montecarlo import estimate_identity
from switchlab.oracle import adapted_rule_check, exhaustive_oracle
from switchlab.scaling import cauchy_trend, convergence_table, dirac_spec, scaling_row, uniform_spec

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.slow


def record(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def some_atoms(rng, lam):
    """Non-empty random subset of the support, used to anchor barriers so the walk actually moves."""
    atoms = sorted(lam.atoms)
    return rng.sample(atoms, rng.randint(1, len(atoms)))


def root_fixture_d1(rng):
    lam = random_measure(rng, 1, 8, 5)
    b = random_root_barrier(rng, 1, 8, 12, anchors=some_atoms(rng, lam))
    return lam, b, rng.randint(-8, 8), rng.randint(0, 12)


def root_fixture_d2(rng):
    lam = random_measure(rng, 2, 2, 3)
    b = random_root_barrier(rng, 2, 2, 4, max_sites=12, anchors=some_atoms(rng, lam))
    return lam, b, (rng.randint(-2, 2), rng.randint(-2, 2)), rng.randint(0, 4)


def rost_fixture(rng, d=1):
    if d == 1:
        lam = random_measure(rng, 1, 8, 5)
        b = random_rost_barrier(rng, 1, 8, 12, anchors=some_atoms(rng, lam))
        return lam, b, rng.randint(-8, 8), rng.randint(0, 12)
    lam = random_measure(rng, 2, 2, 3)
    b = random_rost_barrier(rng, 2, 2, 4, max_sites=12, anchors=some_atoms(rng, lam))
    return lam, b, (rng.randint(-2, 2), rng.randint(-2, 2)), rng.randint(0, 4)


def test_criterion_01_rectangle():
    rng = random.Random(101)
    start = time.perf_counter()
    worst = 0
    for _ in range(200):
        a, b = -rng.randint(1, 10), rng.randint(1, 10)
        x, y = rng.randint(a + 1, b - 1), rng.randint(a + 1, b - 1)
        rep = verify_switch_rectangle(x, y, a, b, rng.randint(0, 20))
        worst = max(worst, rep.residual)
    elapsed = time.perf_counter() - start
    record(1, worst == 0 and elapsed < 10,
           f"rectangle identity, 200 fixtures, max residual {worst}, {elapsed:.2f}s (< 10s)")


def test_criterion_02_core():
    rng = random.Random(102)
    worst, oracles = 0, 0
    for d, count, span in ((1, 100, 10), (2, 30, 3)):
        for _ in range(count):
            x = tuple(rng.randint(-span, span) for _ in range(d))
            y = tuple(rng.randint(-span, span) for _ in range(d))
            T = rng.randint(0, 20)
            rep = verify_core(x, y, T, d=d)
            worst = max(worst, rep.residual, len(set(rep.metadata["sequence"])) - 1)
            if T <= 8:
                worst = max(worst, exhaustive_oracle({"identity": "core", "x": list(x), "y": list(y),
                                                      "T": T, "d": d}).residual)
                oracles += 1
    record(2, worst == 0,
           f"core identity, 100 d=1 + 30 d=2 fixtures, {oracles} path-pair oracle checks, max residual {worst}")


def test_criterion_03_root():
    rng = random.Random(103)
    worst, flat, moved = 0, 0, 0
    for fixture, count in ((root_fixture_d1, 200), (root_fixture_d2, 30)):
        for _ in range(count):
            lam, b, y, T = fixture(rng)
            rep = verify_root_identity(lam, b, y, T)
            worst = max(worst, rep.residual)
            f = rep.metadata["F"]
            flat += all(v == f[0] for v in f)
            moved += stopped_law(lam, b, T).exit_law.atoms != lam.atoms
    record(3, worst == 0 and flat == 230,
           f"root identity three-way, 200 d=1 + 30 d=2, max residual {worst}, F constant on {flat}/230 "
           f"(walk moves before T on {moved}/230)")


def test_criterion_04_monotone():
    rng = random.Random(104)
    worst = 0
    for i in range(100):
        d = 1 if i < 80 else 2
        lam, b, y, T = root_fixture_d1(rng) if d == 1 else root_fixture_d2(rng)
        yp = y if d == 2 else (y,)
        rules = [random_rule(rng, yp, T, d, p=rng.choice([0.1, 0.3, 0.6])) for _ in range(20)]
        x0 = next(iter(lam.atoms))
        sigmas = [random_rule(rng, x0, T, d) for _ in range(2)]
        rep = verify_monotone(lam, b, y, T, rules, sigmas=sigmas)
        worst = max(worst, rep.residual)
    enum = []
    for T in (1, 2, 3, 4, 5, 5):
        lam = random_measure(rng, 1, 3, 3)
        b = random_root_barrier(rng, 1, 4, 6, anchors=some_atoms(rng, lam))
        rep = adapted_rule_check(lam, b, rng.randint(-3, 3), T)
        enum.append((T, rep.metadata["rules"], rep.residual))
    lam = random_measure(rng, 2, 1, 2)
    b = random_root_barrier(rng, 2, 1, 3, max_sites=6, anchors=some_atoms(rng, lam))
    rep = adapted_rule_check(lam, b, (0, 0), 3)
    enum.append((3, rep.metadata["rules"], rep.residual))
    worst_enum = max(r for *_, r in enum)
    rules = sum(n for _, n, _ in enum)
    record(4, worst == 0 and worst_enum == 0 and len(enum) >= 5,
           f"F^tau, F^tau_sigma, F~^tau monotone on 100 fixtures x 20 rules (max drop {worst}); "
           f"adapted enumeration on {len(enum)} fixtures, {rules} rules, max violation {worst_enum}")


def test_criterion_05_symmetry():
    rng = random.Random(105)
    worst, equal, strict = 0, 0, 0
    for _ in range(100):
        x, y, T = rng.randint(-8, 8), rng.randint(-8, 8), rng.randint(0, 12)
        b = random_rost_barrier(rng, 1, 8, 12, anchors=[(y,)])
        sigmas = [random_rule(rng, (x,), T, p=rng.choice([0.1, 0.3, 0.6])) for _ in range(20)]
        rep = verify_symmetry(x, y, T, b, sigmas)
        worst = max(worst, rep.residual)
        equal += rep.rhs[0] == rep.lhs
        strict += any(v > rep.lhs for v in rep.rhs[1:])
    record(5, worst == 0 and equal == 100,
           f"symmetry inequality on 100 Rost fixtures x 20 sigma rules (max violation {worst}); "
           f"equality at sigma* on {equal}/100 (strict for some sigma on {strict}/100)")


def test_criterion_06_rost():
    rng = random.Random(106)
    worst, nonzero = 0, 0
    for d, count in ((1, 200), (2, 20)):
        for _ in range(count):
            lam, b, x, T = rost_fixture(rng, d)
            rep = verify_rost_identity(lam, b, x, T)
            worst = max(worst, rep.residual, *(abs(r - rep.lhs) for r in rep.rhs))
            nonzero += rep.lhs != 0
    record(6, worst == 0, f"Rost identity three-way, 200 d=1 + 20 d=2, max residual {worst} "
                          f"(non-zero value on {nonzero}/220)")


def test_criterion_07_kernel():
    laplace = 0
    for d in (1, 2, 3):
        for R in range(2, 11):
            k = kernel_synthetic(d, R)
            laplace = max([laplace] + [abs(k.laplace_residual(z)) for z in box(d, R - 1)])
    comp = 0
    for d, R in ((1, 10), (2, 10), (3, 10)):
        k = kernel_synthetic(d, R)
        for n in range(9):
            for w in box(d, R - 2 - n):
                if d == 3 and supnorm(w) > 1:
                    continue
                comp = max(comp, verify_compensator(k, w, n).residual)
    k1 = canonical_d1()
    can1 = all(k1.value((z,)) == abs(z) for z in range(-50, 51))
    a10 = kernel_canonical(2, 2).value((1, 0))
    can2 = abs(a10 - 1) <= 1e-3
    # Kernel independence on 20 root fixtures: radius R versus R + 3.
    rng = random.Random(107)
    same = 0
    for i in range(20):
        if i < 10:
            lam, b, y, T = root_fixture_d1(rng)
            y = (y,)
        else:
            lam, b, y, T = root_fixture_d2(rng)
        span = _root_span(lam, b, y, T)
        ka, kb = kernel_synthetic(lam.d, span + 2, span + 1), kernel_synthetic(lam.d, span + 5, span + 1)
        ra, rb = verify_root_identity(lam, b, y, T, ka), verify_root_identity(lam, b, y, T, kb)
        # The kernels differ by a function harmonic on the box; values agree after removing its average.
        mu_t = stopped_law(lam, b, T).exit_law
        corr = -sum(w * (ka.value(tuple(u - v for u, v in zip(y, p))) - kb.value(tuple(u - v for u, v in zip(y, p))))
                    for p, w in mu_t.atoms.items())
        same += (ra.verdict == rb.verdict and ra.residual == rb.residual == 0 and ra.lhs - corr == rb.lhs
                 and [v - corr for v in ra.rhs] == rb.rhs)
    ok = laplace == 0 and comp == 0 and can1 and can2 and same == 20
    record(7, ok, f"Laplace residual {laplace} (d=1,2,3, R<=10); compensator n<=8 residual {comp}; "
                  f"d=1 canonical |z| {'exact' if can1 else 'WRONG'}; d=2 a((1,0)) = {a10:.6f}; "
                  f"kernel independence {same}/20")


def test_criterion_08_replacement():
    rng = random.Random(108)
    worst, sites = 0, 0
    for _ in range(100):
        lam, b, _, T = root_fixture_d1(rng)
        rep = verify_replacement(b, lam, T)
        worst = max(worst, rep.residual)
        sites += len(rep.metadata["checked"])
    sharp = verify_replacement(sharpness_barrier(), dirac(0), 1)
    viol = sharp.metadata["out_of_scope_violations"]
    record(8, worst == 0 and sharp.verdict and len(viol) >= 1,
           f"replacement exact on 100 fixtures ({sites} sites, max residual {worst}); "
           f"sharpness fixture fails at {len(viol)} late site(s)")


MC_SEEDS = range(30)


def mc_fixtures():
    rng = random.Random(109)
    out = []
    for i in MC_SEEDS:
        kind = ("rectangle", "core", "root", "rost")[i % 4]
        if kind == "rectangle":
            a, b = -rng.randint(1, 6), rng.randint(1, 6)
            out.append({"identity": "rectangle", "x": rng.randint(a + 1, b - 1), "y": rng.randint(a + 1, b - 1),
                        "a": a, "b": b, "T": rng.randint(0, 10)})
        elif kind == "core":
            d = 1 + (i % 3 == 0)
            out.append({"identity": "core", "x": [rng.randint(-3, 3) for _ in range(d)],
                        "y": [rng.randint(-3, 3) for _ in range(d)], "T": rng.randint(0, 8), "d": d})
        elif kind == "root":
            lam = random_measure(rng, 1, 4, 3)
            out.append({"identity": "root", "lambda": lam,
                        "barrier": random_root_barrier(rng, 1, 4, 8, anchors=some_atoms(rng, lam)),
                        "y": [rng.randint(-4, 4)], "T": rng.randint(0, 8)})
        else:
            lam = random_measure(rng, 1, 4, 3)
            out.append({"identity": "rost", "lambda": lam,
                        "barrier": random_rost_barrier(rng, 1, 4, 8, anchors=some_atoms(rng, lam)),
                        "x": [rng.randint(-4, 4)], "T": rng.randint(0, 8)})
    return out


def test_criterion_09_montecarlo():
    # With 60 independent estimates the chance that any exceeds 4 SE is about 60 * 6.3e-5 < 0.4%.
    n = 10 ** 5
    fixtures = mc_fixtures()
    first = [estimate_identity(f, seed, n) for f, seed in zip(fixtures, MC_SEEDS)]
    second = [estimate_identity(f, seed, n) for f, seed in zip(fixtures, MC_SEEDS)]
    inside = sum(e.within(4.0) for pair in first for e in pair)
    worst = max(abs(e.z) for pair in first for e in pair)
    bitexact = all(a.estimate == b.estimate and a.se == b.se for p, q in zip(first, second) for a, b in zip(p, q))
    record(9, inside == 60 and bitexact,
           f"Monte Carlo, 30 fixtures x 2 sides at n=1e5: {inside}/60 within 4 SE (max |z| {worst:.2f}); "
           f"bit-exact rerun {bitexact}")


def test_criterion_10_scaling():
    start = time.perf_counter()
    rows = convergence_table(dirac_spec(0), uniform_spec(-1, 1), 1, 0, [4, 16, 64, 256])
    elapsed = time.perf_counter() - start
    residual = max(r.residual for r in rows)
    # construct_root_barrier refuses barriers that fail the gate; repeat the check here for the record.
    gated = 0
    for N in (4, 16, 64, 256):
        _, b, lam, mu = scaling_row(dirac_spec(0), uniform_spec(-1, 1), 1, 0, N)
        gated += stopped_law(lam, b, None).exit_law.atoms == mu.atoms
    trend = cauchy_trend(rows)
    values = ", ".join(f"N={r.N}: {float(r.value_lhs):.6f}" for r in rows)
    record(10, residual == 0 and gated == 4 and trend and elapsed < 300,
           f"scaling table ({values}); residual {residual}; embedding gate {gated}/4; "
           f"|delta| {float(abs(rows[-2].delta)):.5f} -> {float(abs(rows[-1].delta)):.5f}; {elapsed:.1f}s (< 300s)")
