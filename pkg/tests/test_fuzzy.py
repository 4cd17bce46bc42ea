import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from botprof.fuzzy import (
    LinguisticVariable,
    Trapezoid,
    check_ref_axioms,
    fuzzify,
    membership,
    ref_g,
)
from botprof.network import default_network

CLOSE = Trapezoid(0, 0, 4, 7)
NORMAL = Trapezoid(6, 9, 11, 14)
FAR = Trapezoid(13, 16, 38, 38)
DISTANCE = LinguisticVariable("Distance", (("Close", CLOSE), ("Normal", NORMAL), ("Far", FAR)), 0, 38)
unit = st.floats(0, 1, allow_nan=False)


@pytest.mark.parametrize(
    "trap,x,expected",
    [
        (CLOSE, 3.60, 1.0),
        (CLOSE, 5.5, 0.5),
        (CLOSE, 7, 0.0),
        (FAR, 15.26, 2.26 / 3),
        (NORMAL, 13.0, 1 / 3),
        (NORMAL, 7.5, 0.5),
        (Trapezoid(0, 0, 768, 1280), 924, 0.6953125),
        (Trapezoid(18, 30, 42, 54), 42, 1.0),
    ],
)
def test_membership_examples(trap, x, expected):
    assert membership(trap, x) == pytest.approx(expected, abs=1e-9)


def test_step_edges_belong_to_plateau():
    assert membership(Trapezoid(0, 0, 0, 2), 0) == 1.0
    assert membership(Trapezoid(4, 6, 380, 380), 380) == 1.0
    assert membership(Trapezoid(5, 5, 5, 5), 5) == 1.0
    assert membership(Trapezoid(5, 5, 5, 5), 5.001) == 0.0


def test_trapezoid_rejects_unordered_points():
    with pytest.raises(ValueError, match="a <= b <= c <= d"):
        Trapezoid(3, 1, 4, 5)


@given(
    st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=4, max_size=4),
    st.floats(-2e3, 2e3, allow_nan=False),
)
def test_membership_in_unit_interval(points, x):
    t = Trapezoid(*sorted(points))
    assert 0.0 <= membership(t, x) <= 1.0


@given(st.floats(0, 38), st.floats(0, 38))
def test_membership_is_unimodal_on_left_shoulder(x, y):
    lo, hi = sorted((x, y))
    if hi <= NORMAL.b:
        assert membership(NORMAL, lo) <= membership(NORMAL, hi)
    if lo >= NORMAL.c:
        assert membership(NORMAL, lo) >= membership(NORMAL, hi)


def test_fuzzify_picks_max_and_earliest_on_tie():
    assert fuzzify(DISTANCE, 3.6).label == "Close"
    assert fuzzify(DISTANCE, 12.0).label == "Normal"
    # 13.5: Normal 0.167, Far 0.167 -> earliest declared wins
    v = fuzzify(DISTANCE, 13.5)
    assert v.label == "Normal" and v.degree == pytest.approx(1 / 6)
    assert fuzzify(DISTANCE, 6.5).label == "Close"


def test_fuzzify_clamps_out_of_domain():
    v = fuzzify(DISTANCE, 120)
    assert (v.label, v.degree, v.raw) == ("Far", 1.0, 38.0)
    assert fuzzify(DISTANCE, -3).raw == 0.0


@given(st.floats(-50, 100, allow_nan=False))
def test_fuzzify_degree_positive_on_covered_variable(x):
    assert fuzzify(DISTANCE, x).degree > 0


def test_coverage_gap_rejected():
    with pytest.raises(ValueError, match="zero membership"):
        LinguisticVariable("Gappy", (("A", Trapezoid(0, 0, 1, 2)), ("B", Trapezoid(3, 4, 5, 5))), 0, 5)


def test_coverage_touching_feet_rejected():
    # both feet at 2: membership 0 in each term there
    with pytest.raises(ValueError, match="leaves 2"):
        LinguisticVariable("Touch", (("A", Trapezoid(0, 0, 1, 2)), ("B", Trapezoid(2, 3, 5, 5))), 0, 5)


def test_duplicate_labels_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        LinguisticVariable("Dup", (("A", CLOSE), ("A", FAR)), 0, 38)


def test_shipped_variables_cover_domains():
    for var in default_network().variables.values():
        assert var._coverage_gap() is None


def test_ref_g_values():
    assert ref_g(0.240, 0.122) == pytest.approx(0.882, abs=1e-9)
    assert ref_g(0.3, 0.3) == 1.0
    assert ref_g(0.0, 1.0) == 0.0


def test_ref_g_rejects_outside_unit_square():
    with pytest.raises(ValueError):
        ref_g(1.2, 0.5)


@given(unit, unit)
def test_ref_g_symmetric_bounded(x, y):
    assert ref_g(x, y) == ref_g(y, x)
    assert 0.0 <= ref_g(x, y) <= 1.0


def test_ref_axioms_on_grid():
    grid = [i / 100 for i in range(101)]
    assert check_ref_axioms(ref_g, grid) == []


def test_ref_axiom_checker_flags_non_ref():
    grid = [i / 10 for i in range(11)]
    product = lambda x, y: x * y
    problems = check_ref_axioms(product, grid)
    assert any(p.startswith("identity") for p in problems)
    squared = lambda x, y: 1 - (x - y) ** 2
    assert check_ref_axioms(squared, grid) == []
    asym = lambda x, y: 1 - abs(x - y) * (1 if x < y else 0.5)
    assert any(p.startswith("symmetry") for p in check_ref_axioms(asym, grid))
    assert math.isclose(ref_g(0.5, 0.25), 0.75)
