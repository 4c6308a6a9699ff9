from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from switchlab.barriers import ROOT, ROST, make_barrier
from switchlab.measures import make_measure
from switchlab.numeric import INF

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def measures(draw, d=1, half=4, max_atoms=4):
    coord = st.integers(-half, half)
    point = coord.map(lambda c: (c,)) if d == 1 else st.tuples(*[coord] * d)
    pts = draw(st.lists(point, min_size=1, max_size=max_atoms, unique=True))
    raw = draw(st.lists(st.integers(1, 8), min_size=len(pts), max_size=len(pts)))
    total = sum(raw)
    return make_measure(d, [(p, Fraction(r, total)) for p, r in zip(pts, raw)])


@st.composite
def root_barriers(draw, d=1, half=4, max_entry=6):
    coord = st.integers(-half, half)
    point = coord.map(lambda c: (c,)) if d == 1 else st.tuples(*[coord] * d)
    entries = draw(st.dictionaries(point, st.one_of(st.integers(0, max_entry), st.just(INF)),
                                   max_size=(2 * half + 1) ** d))
    return make_barrier(ROOT, d, entries)


@st.composite
def rost_barriers(draw, d=1, half=4, max_entry=6):
    coord = st.integers(-half, half)
    point = coord.map(lambda c: (c,)) if d == 1 else st.tuples(*[coord] * d)
    entries = draw(st.dictionaries(point, st.integers(0, max_entry), max_size=(2 * half + 1) ** d))
    return make_barrier(ROST, d, entries)


@pytest.fixture
def worked():
    return make_barrier(ROOT, 1, {0: INF, -1: 1, 1: 1})


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
