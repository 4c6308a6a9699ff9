from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from switchlab.errors import (DimensionMismatch, EmptySupport, MassNotOne, NegativeWeight,
                              UnsupportedDimension)
from switchlab.kernel import canonical_d1, kernel_synthetic
from switchlab.measures import convex_order, dirac, make_measure, measure_from_json, potential
from switchlab.numeric import NumericMode

from conftest import measures

H = Fraction(1, 2)
K1 = canonical_d1()


def test_make_measure_examples():
    assert dirac(0).atoms == {(0,): 1}
    two = make_measure(1, [(-1, H), (1, H)])
    assert two.atoms == {(-1,): H, (1,): H}
    assert make_measure(1, [(0, H), (0, H)]).atoms == {(0,): 1}


def test_make_measure_errors():
    with pytest.raises(NegativeWeight):
        make_measure(1, [(0, Fraction(3, 2)), (1, Fraction(-1, 2))])
    with pytest.raises(MassNotOne):
        make_measure(1, [(0, H)])
    with pytest.raises(EmptySupport):
        make_measure(1, [])
    with pytest.raises(TypeError):
        make_measure(1, [(0, 1.0)], mode=NumericMode())


def test_approx_mode_tolerance():
    m = make_measure(1, [(0, 0.5), (1, 0.5 + 1e-12)], mode=NumericMode.approx(1e-9))
    assert not m.mode.exact
    with pytest.raises(MassNotOne):
        make_measure(1, [(0, 0.5), (1, 0.6)], mode=NumericMode.approx(1e-9))


def test_json_roundtrip():
    m = make_measure(2, [((0, 1), Fraction(1, 3)), ((2, -1), Fraction(2, 3))])
    assert measure_from_json(m.to_json()) == m
    assert dirac(0).to_json() == {"d": 1, "atoms": [{"x": [0], "num": 1, "den": 1}]}


def test_potential_examples():
    assert potential(dirac(0), 3, K1) == -3
    assert potential(make_measure(1, [(-1, H), (1, H)]), 0, K1) == -1
    # -(1/4 * 3 + 3/4 * 1) by direct summation
    assert potential(make_measure(1, [(-2, Fraction(1, 4)), (2, Fraction(3, 4))]), 1, K1) == Fraction(-3, 2)


def test_potential_dimension_check():
    with pytest.raises(DimensionMismatch):
        potential(dirac((0, 0), 2), (0, 0), K1)


def test_convex_order_examples():
    assert convex_order(dirac(0), make_measure(1, [(-1, H), (1, H)]))
    assert not convex_order(dirac(0), dirac(1))
    assert not convex_order(make_measure(1, [(-1, H), (1, H)]), dirac(0))
    with pytest.raises(UnsupportedDimension):
        convex_order(dirac((0, 0), 2), dirac((0, 0), 2))
    with pytest.raises(DimensionMismatch):
        convex_order(dirac(0), dirac((0, 0), 2))


@given(measures(), st.integers(-8, 8))
def test_potential_concave(m, y):
    u = lambda z: potential(m, z, K1)
    gap = 2 * u(y) - u(y - 1) - u(y + 1)
    assert gap >= 0
    assert (gap == 0) == (m[y] == 0)


@given(measures(), measures(), st.fractions(0, 1), st.integers(-6, 6))
def test_potential_linear(m1, m2, alpha, y):
    mix = m1.mix(m2, alpha)
    assert potential(mix, y, K1) == alpha * potential(m1, y, K1) + (1 - alpha) * potential(m2, y, K1)


@given(measures(d=2, half=2), st.tuples(st.integers(-2, 2), st.integers(-2, 2)))
def test_potential_linear_d2_synthetic(m, y):
    k = kernel_synthetic(2, 6)
    assert potential(m, y, k) == -sum(w * k.value((y[0] - x[0], y[1] - x[1])) for x, w in m.atoms.items())


def _spread(m, site):
    """Split the atom at ``site`` symmetrically: a mean-preserving spread."""
    w = m[site]
    if w == 0:
        return m
    atoms = dict(m.atoms)
    del atoms[(site,)]
    for p in (site - 1, site + 1):
        atoms[(p,)] = atoms.get((p,), 0) + w / 2
    return make_measure(1, atoms.items())


@given(measures(), st.integers(-4, 4), st.integers(-4, 4))
def test_convex_order_transitive(m, a, b):
    m2 = _spread(m, a)
    m3 = _spread(m2, b)
    assert convex_order(m, m2) and convex_order(m2, m3)
    assert convex_order(m, m3)


@given(measures(), measures(), measures())
def test_convex_order_transitive_random_triples(a, b, c):
    if convex_order(a, b) and convex_order(b, c):
        assert convex_order(a, c)
