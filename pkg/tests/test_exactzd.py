import itertools

import pytest
from hypothesis import given, settings, strategies as st

from horofront.errors import FamilyMismatch, HypothesisViolation, SpecError
from horofront.exactzd import (
    NEG,
    POS,
    ZdFunctional,
    classify,
    eval_functional,
    lift_functional,
    realized_patterns,
    restrict,
    standard_metric,
    zd,
    zd_act,
)
from horofront.functionals import busemann, orbit, scan_boundary
from horofront.groups import abelianization, free_abelian, free_group
from horofront.metrics import WordMetric

coord = st.one_of(st.integers(-6, 6), st.sampled_from([POS, NEG]))
vec = st.tuples(st.integers(-5, 5), st.integers(-5, 5))


def test_closed_form_values():
    assert eval_functional([POS, 2], (1, 5)) == -1 + 1
    assert eval_functional([NEG], (4,)) == 4
    assert eval_functional([3], (3,)) == -3
    assert str(zd_act((1, 1), [POS, 2])) == "(+inf,3)"


def test_classify():
    assert classify([1, 2]) == "interior"
    assert classify([POS, 1]) == "boundary"
    assert classify(["-inf", "+inf"]) == "boundary_fixed"
    with pytest.raises(SpecError):
        zd(1.5)
    with pytest.raises(FamilyMismatch):
        eval_functional([POS], (1, 2))


@given(st.tuples(coord, coord), vec, vec)
@settings(max_examples=300, derandomize=True)
def test_action_formula(alpha, g, y):
    # (g.h)(y) = h(g^-1 y) - h(g^-1)
    gi = tuple(-t for t in g)
    lhs = eval_functional(zd_act(g, alpha), y)
    rhs = eval_functional(alpha, tuple(a + b for a, b in zip(gi, y))) - eval_functional(alpha, gi)
    assert lhs == rhs


@given(st.tuples(st.integers(-4, 4), st.integers(-4, 4)))
@settings(max_examples=100, derandomize=True)
def test_interior_points_are_busemann(a):
    # h_a = b_a for integer alpha
    m = standard_metric(2)
    assert restrict(a, 3).values == busemann(m, a, 3).values


def test_infinite_coordinate_is_a_limit():
    m = standard_metric(2)
    assert restrict([POS, -1], 3).values == busemann(m, (40, -1), 3).values


def test_restrict_requires_standard_marking():
    m = WordMetric(free_abelian(1, [(1,), (2,)]))
    with pytest.raises(FamilyMismatch):
        restrict([POS], 2, m)


def test_oracle_counts():
    assert len(realized_patterns(1, 2, 10, 2)) == 2
    assert len(realized_patterns(2, 3, 12, 2)) == 24


@pytest.mark.parametrize("d,R,R_scan", [(1, 2, 10), (2, 3, 12)])
def test_scan_matches_oracle(d, R, R_scan):
    scan = scan_boundary(standard_metric(d), R, R_scan, 2)
    assert scan.values_set() == realized_patterns(d, R, R_scan, 2)


@pytest.mark.parametrize("d", [1, 2])
def test_fixed_points_are_the_corners(d):
    m = standard_metric(d)
    scan = scan_boundary(m, 3, 12, 2)
    fixed = {c.values for c in scan.candidates if orbit(m, scan.functional(c), 50).verdict == "fixed_point"}
    corners = {restrict(a, 3).values for a in itertools.product((NEG, POS), repeat=d)}
    assert fixed == corners


def test_lift_functional():
    F = free_group(2)
    pi = abelianization(F)
    f = lift_functional(pi, [POS, POS], 2, 4)
    assert f.value(F.parse("ab")) == -4
    assert f.value(F.parse("abAB")) == 0
    assert orbit(f.metric, f, 10).verdict == "fixed_point"
    with pytest.raises(HypothesisViolation):
        lift_functional(pi, [1, 2], 2, 4)
    with pytest.raises(FamilyMismatch):
        lift_functional(pi, [POS], 2, 4)


def test_functional_json():
    assert ZdFunctional((POS, 3)).to_json() == ["+inf", 3]
    assert zd("-inf", 2).alpha == (NEG, 2)
