import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from switchlab.barriers import ROOT, make_barrier
from switchlab.errors import ResourceLimit
from switchlab.fixtures import random_measure, random_root_barrier, random_rost_barrier
from switchlab.measures import dirac
from switchlab.numeric import INF
from switchlab.oracle import (adapted_rule_check, adapted_stopping_times, count_adapted_rules,
                              enumerate_paths, exhaustive_oracle, first_stop, oracle_core)
from switchlab.kernel import canonical_d1

from conftest import measures, root_barriers, rost_barriers


def test_paths_shape_and_steps():
    p = enumerate_paths((0,), 1, 3)
    assert p.shape == (8, 4, 1)
    assert np.all(np.abs(np.diff(p[:, :, 0], axis=1)) == 1)
    assert enumerate_paths((1, 1), 2, 2).shape == (16, 3, 2)


def test_first_stop():
    p = enumerate_paths((0,), 1, 2)
    assert p[:, :, 0].tolist() == [[0, 1, 2], [0, 1, 0], [0, -1, 0], [0, -1, -2]]
    # Paths that never stop are capped at the horizon.
    assert first_stop(p, lambda t, m: m == (1,)).tolist() == [1, 1, 2, 2]


def test_rule_counts():
    assert [count_adapted_rules(T) for T in range(4)] == [1, 2, 5, 26]
    assert count_adapted_rules(2, 2) == 17
    assert count_adapted_rules(6) > 10 ** 11
    taus = adapted_stopping_times(2)
    assert taus.shape == (5, 4)
    # rows are distinct stopping-time vectors
    assert len({tuple(r) for r in taus.tolist()}) == 5


def test_rule_enumeration_limit():
    with pytest.raises(ResourceLimit):
        adapted_stopping_times(6)


def test_oracle_core_constant():
    assert oracle_core((0,), (0,), 2, canonical_d1()) == [1, 1, 1]


def test_oracle_horizon_limit():
    with pytest.raises(ResourceLimit):
        exhaustive_oracle({"identity": "core", "x": [0], "y": [0], "T": 9, "d": 1})


@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(0, 8))
def test_oracle_core_matches_dp(x, y, T):
    assert exhaustive_oracle({"identity": "core", "x": [x], "y": [y], "T": T, "d": 1}).residual == 0


@given(st.integers(-5, -1), st.integers(1, 5), st.integers(0, 8), st.data())
def test_oracle_rectangle(a, b, T, data):
    x = data.draw(st.integers(a + 1, b - 1))
    y = data.draw(st.integers(a + 1, b - 1))
    f = {"identity": "rectangle", "x": x, "y": y, "a": a, "b": b, "T": T}
    assert exhaustive_oracle(f).residual == 0


@settings(max_examples=30)
@given(measures(max_atoms=3), root_barriers(half=4, max_entry=6), st.integers(0, 6), st.integers(-3, 3))
def test_oracle_root(lam, b, T, y):
    f = {"identity": "root", "lambda": lam, "barrier": b, "y": [y], "T": T}
    assert exhaustive_oracle(f).residual == 0


@settings(max_examples=30)
@given(measures(max_atoms=3), rost_barriers(half=4, max_entry=6), st.integers(0, 6), st.integers(-3, 3))
def test_oracle_rost(lam, b, T, x):
    f = {"identity": "rost", "lambda": lam, "barrier": b, "x": [x], "T": T}
    assert exhaustive_oracle(f).residual == 0


def test_oracle_d2():
    rng = random.Random(2)
    for _ in range(3):
        lam = random_measure(rng, 2, 1, 2)
        f = {"identity": "root", "lambda": lam, "barrier": random_root_barrier(rng, 2, 1, 3, max_sites=5),
             "y": [0, 0], "T": 3}
        assert exhaustive_oracle(f).residual == 0
        f = {"identity": "rost", "lambda": lam, "barrier": random_rost_barrier(rng, 2, 1, 3, max_sites=5),
             "x": [1, 0], "T": 3}
        assert exhaustive_oracle(f).residual == 0


def test_adapted_rules_worked():
    b = make_barrier(ROOT, 1, {0: INF, -1: 1, 1: 1})
    rep = adapted_rule_check(dirac(0), b, 0, 3)
    assert rep.residual == 0 and rep.metadata["rules"] == 26
    assert rep.rhs[0] == rep.rhs[1] == rep.lhs


def test_adapted_rules_random():
    rng = random.Random(11)
    for T in (2, 4):
        lam = random_measure(rng, 1, 2, 3)
        b = random_root_barrier(rng, 1, 3, 5)
        assert adapted_rule_check(lam, b, rng.randint(-2, 2), T).residual == 0


def test_adapted_rules_d2():
    lam = dirac((0, 0), 2)
    b = make_barrier(ROOT, 2, {(0, 0): INF, (1, 0): 1, (0, 1): 2})
    assert adapted_rule_check(lam, b, (0, 0), 2).residual == 0
