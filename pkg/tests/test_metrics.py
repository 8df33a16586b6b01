import pytest
from hypothesis import given, settings, strategies as st

from conftest import VARIANTS, combo_f2
from horofront.errors import HypothesisViolation, MemoryCapExceeded, SpecError
from horofront.groups import FiniteIndexSubgroup, LatticeMembership, abelianization, free_abelian, free_group, infinite_dihedral
from horofront.metrics import (
    ScaledMetric,
    WordMetric,
    banach_combine,
    compatibility_constant,
    growth,
    induced,
    metric_from_spec,
    scaled,
    validate_banach_axioms,
)


def test_free_group_growth_matches_formula():
    t = growth(WordMetric(free_group(2)), 5)
    assert [n for _, n in t.rows] == [2 * 3**r - 1 for r in range(6)]
    assert t.to_csv().splitlines()[:3] == ["r,size", "0,1", "1,5"]


def test_zd_and_dihedral_growth():
    assert [n for _, n in growth(WordMetric(free_abelian(2)), 4).rows] == [2 * r * r + 2 * r + 1 for r in range(5)]
    assert WordMetric(infinite_dihedral()).ball(3).sizes() == [(0, 1), (1, 4), (2, 8), (3, 12)]


def test_closed_form_agrees_with_bfs():
    F = free_group(2)
    fast, slow = WordMetric(F), WordMetric(F, closed_form=False)
    for x in fast.ball(4).elements:
        assert slow.norm(x) == len(x)
    Z = free_abelian(2)
    fast, slow = WordMetric(Z), WordMetric(Z, closed_form=False)
    for x in fast.ball(4).elements:
        assert slow.norm(x) == abs(x[0]) + abs(x[1])


def test_ball_order_and_prefix():
    m = WordMetric(free_group(2, ["a", "b", "ab"]))
    big, small = m.ball(4), m.ball(2)
    assert list(big.elements[: len(small)]) == list(small.elements)
    assert list(big.distances) == sorted(big.distances)
    assert big.elements[0] == ()


def test_memory_cap_reports_radius():
    m = WordMetric(free_group(2), cap=100)
    with pytest.raises(MemoryCapExceeded) as info:
        m.ball(5)
    assert info.value.radius_reached == 3
    t = growth(WordMetric(free_group(2), cap=100), 6)
    assert t.truncated and t.radius_reached == 3


def test_disk_cache_roundtrip(tmp_path):
    F = free_group(2)
    a = WordMetric(F, cache_dir=tmp_path)
    ball = a.ball(3)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    b = WordMetric(F, cache_dir=tmp_path)
    assert list(b.ball(3).elements) == list(ball.elements)
    # a corrupt file is rebuilt rather than trusted
    files[0].write_text("garbage\n")
    c = WordMetric(F, cache_dir=tmp_path)
    assert list(c.ball(3).elements) == list(ball.elements)


def test_scaled_and_induced_norms():
    F = free_group(2)
    assert scaled(WordMetric(F), 3).norm(F.parse("ab")) == 6
    D = infinite_dihedral()
    N = FiniteIndexSubgroup(D, LatticeMembership(3, "trivial"), [((3,), 0)])
    m = induced(N)
    assert m.norm(((6,), 0)) == 6
    assert m.ball(6).sizes()[-1] == (6, 5)


def test_max_combo_examples():
    F = free_group(2)
    D = combo_f2()
    assert D.C == 1 and D.M == 2
    assert D.distance((), F.parse("a")) == 2
    assert D.distance((), F.parse("abAB")) == 4
    with pytest.raises(HypothesisViolation):
        banach_combine(WordMetric(F), abelianization(F), WordMetric(free_abelian(2)), 1)


def test_compatibility_constants():
    F = free_group(2)
    pi = abelianization(F)
    assert compatibility_constant(WordMetric(F), pi, WordMetric(free_abelian(2))) == 1
    doubled = free_abelian(2, [(1, 0), (0, 1), (2, 0), (0, 2)])
    assert compatibility_constant(WordMetric(F), pi, WordMetric(doubled)) == 2
    assert compatibility_constant(WordMetric(F), pi, ScaledMetric(WordMetric(free_abelian(2)), 3)) == 3


def test_metric_from_spec():
    F = free_group(2)
    assert metric_from_spec({"type": "scaled", "factor": 2}, F).norm((1,)) == 2
    assert isinstance(metric_from_spec(None, F), WordMetric)
    with pytest.raises(SpecError):
        metric_from_spec({"type": "mystery"}, F)
    with pytest.raises(SpecError):
        metric_from_spec({"type": "induced"}, F)


def test_validate_word_metric():
    rep = validate_banach_axioms(WordMetric(free_group(2)), 5)
    assert all(v.status == "pass" for v in rep.verdicts[:4])
    assert rep.verdict("quasi_isometric").details["constant"] == 1
    assert rep.verdict("unbounded_functionals").status == "probe_pass"


def test_validate_scaled_reports_min_distance():
    rep = validate_banach_axioms(scaled(WordMetric(free_abelian(1)), 3), 6)
    assert all(v.status == "pass" for v in rep.verdicts[:4])
    assert rep.verdict("quasi_isometric").details["min_nonzero_distance"] == 3


def test_validate_max_combo_qi_constant():
    rep = validate_banach_axioms(combo_f2(), 5)
    assert all(v.status == "pass" for v in rep.verdicts[:4])
    assert rep.verdict("quasi_isometric").details["constant"] == 2


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_metric_axioms(name):
    m = VARIANTS[name]()
    els = m.ball(3 * m.max_generator_length()).elements
    pt = st.sampled_from(els)

    @given(pt, pt, pt)
    @settings(max_examples=1000, derandomize=True, deadline=None)
    def check(x, y, z):
        g = m.group
        assert m.distance(x, z) <= m.distance(x, y) + m.distance(y, z)
        assert m.distance(g.mul(z, x), g.mul(z, y)) == m.distance(x, y)
        assert m.distance(x, y) == m.distance(y, x)
        assert (m.distance(x, y) == 0) == (x == y)

    check()
