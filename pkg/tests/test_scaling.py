from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from switchlab.errors import ConvexOrderLost, EmbeddingMismatch
from switchlab.exit_law import stopped_law
from switchlab.kernel import canonical_d1
from switchlab.measures import dirac, make_measure, potential
from switchlab.scaling import (ContinuumSpec, cauchy_trend, construct_root_barrier, convergence_table,
                               dirac_spec, discretize_measure, grid_scale, hat_projection, obstacle_barrier,
                               scaled_horizon, scaled_point, table_csv, uniform_spec, wasserstein1)

H = Fraction(1, 2)
TWO_ATOM = ContinuumSpec(atoms=[(-1, H), (1, H)])


def test_spec_validation():
    with pytest.raises(ValueError):
        ContinuumSpec(atoms=[(0, H)])
    with pytest.raises(ValueError):
        ContinuumSpec(uniforms=[(1, 1, 1)])
    s = ContinuumSpec(atoms=[(0, H)], uniforms=[(-1, 1, H)])
    assert s.mean() == 0 and s.cdf(Fraction(0)) == Fraction(3, 4)
    assert ContinuumSpec.from_json(s.to_json()) == s


def test_grid_scale():
    assert grid_scale(64) == 8
    with pytest.raises(ValueError):
        grid_scale(8)
    assert scaled_point(Fraction(1, 2), 16) == 2 and scaled_horizon(Fraction(1, 4), 16) == 4
    with pytest.raises(ValueError):
        scaled_point(Fraction(1, 3), 16)


@pytest.mark.parametrize("N", [1, 4, 16, 64])
def test_dirac_projects_to_dirac(N):
    assert hat_projection(dirac_spec(0), N).atoms == dirac(0).atoms


def test_uniform_symmetric_at_4():
    m = hat_projection(uniform_spec(-1, 1), 4)
    assert all(m.atoms[(-p[0],)] == w for p, w in m.atoms.items())
    assert m.mean()[0] == 0 and m.total == 1


def test_uniform_w1_decreases():
    spec = uniform_spec(-1, 1)
    w = [wasserstein1(hat_projection(spec, N), spec, N) for N in (4, 16, 64)]
    assert w == [Fraction(1, 8), Fraction(1, 16), Fraction(1, 32)]


def test_w1_of_exact_grid_law_is_zero():
    assert wasserstein1(make_measure(1, [(-2, H), (2, H)]), TWO_ATOM, 4) == 0
    assert wasserstein1(dirac(0), dirac_spec(1), 1) == 1


@settings(max_examples=30)
@given(st.lists(st.tuples(st.fractions(-3, 3, max_denominator=8), st.integers(1, 5)), min_size=1, max_size=3),
       st.lists(st.tuples(st.fractions(-3, 0, max_denominator=8), st.fractions(Fraction(1, 8), 3, max_denominator=8),
                          st.integers(1, 5)), max_size=2),
       st.sampled_from([1, 4, 16]))
def test_projection_preserves_mass_and_mean(atoms, unis, N):
    tot = sum(w for *_, w in atoms) + sum(w for *_, w in unis)
    spec = ContinuumSpec([(x, Fraction(w, tot)) for x, w in atoms],
                         [(a, a + l, Fraction(w, tot)) for a, l, w in unis])
    m = hat_projection(spec, N)
    assert m.total == 1
    assert Fraction(m.mean()[0]) == spec.mean() * grid_scale(N)
    assert all(w >= 0 for w in m.atoms.values())


def test_convex_order_lost():
    with pytest.raises(ConvexOrderLost):
        discretize_measure(dirac_spec(0), 4, partner=hat_projection(uniform_spec(-1, 1), 4))
    with pytest.raises(ConvexOrderLost):
        construct_root_barrier(make_measure(1, [(-1, H), (1, H)]), dirac(0))


def test_two_atom_barrier():
    mu = make_measure(1, [(-1, H), (1, H)])
    b = construct_root_barrier(dirac(0), mu)
    assert b.entry((0,)) == 1 and b.entry((1,)) == 0 and b.entry((-1,)) == 0
    assert stopped_law(dirac(0), b, None).exit_law.atoms == mu.atoms


def test_identity_target_gives_empty_barrier():
    lam = make_measure(1, [(-2, Fraction(1, 3)), (1, Fraction(2, 3))])
    b = construct_root_barrier(lam, lam)
    assert all(b.entry(p) == 0 for p in lam.atoms)
    assert stopped_law(lam, b, None).exit_law.atoms == lam.atoms


def test_asymmetric_ruin_target():
    mu = make_measure(1, [(-1, Fraction(2, 3)), (2, Fraction(1, 3))])
    b = construct_root_barrier(dirac(0), mu)
    assert stopped_law(dirac(0), b, None).exit_law.atoms == mu.atoms


def test_gate_rejects_unembeddable_target():
    # The hat projection of a uniform law is not an exact Root exit law at this scale.
    lam, mu = dirac(0), hat_projection(uniform_spec(-1, 1), 16)
    with pytest.raises(EmbeddingMismatch) as info:
        construct_root_barrier(lam, mu, window=16, max_window=32)
    assert info.value.args


def test_obstacle_barrier_window():
    b = obstacle_barrier(dirac(0), make_measure(1, [(-1, H), (1, H)]), 4)
    assert b.entry((0,)) == 1


def test_two_atom_exit_value_is_scale_invariant():
    k = canonical_d1()
    for N in (4, 16, 64):
        rows = convergence_table(dirac_spec(0), TWO_ATOM, 1, 0, [N])
        assert rows[0].residual == 0 and rows[0].w1_embedded == 0
        s = grid_scale(N)
        mu = hat_projection(TWO_ATOM, N)
        b = construct_root_barrier(dirac(0), mu, window=16 * N)
        assert potential(stopped_law(dirac(0), b, None).exit_law, (0,), k) / s == -1


def test_equal_laws_table_is_flat():
    rows = convergence_table(TWO_ATOM, TWO_ATOM, 1, 0, [4, 16])
    assert [r.value_lhs for r in rows] == [-1, -1]
    assert rows[1].delta == 0 and cauchy_trend(rows)


def test_uniform_table():
    rows = convergence_table(dirac_spec(0), uniform_spec(-1, 1), 1, 0, [4, 16, 64])
    assert [r.N for r in rows] == [4, 16, 64]
    assert all(r.residual == 0 and r.value_lhs == r.value_rhs for r in rows)
    assert rows[0].value_lhs == -H and rows[1].value_lhs == Fraction(-35, 64)
    assert cauchy_trend(rows)
    csv = table_csv(rows)
    assert csv.splitlines()[0] == "N,lhs,rhs,residual,delta,w1_target,w1_embedded"
    assert len(csv.splitlines()) == 4


def test_cauchy_trend_short_tables():
    assert cauchy_trend([])
