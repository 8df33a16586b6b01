import pytest
from hypothesis import given, settings, strategies as st

from conftest import VARIANTS, word_f2
from horofront.errors import NotFiniteOrbit, RadiusExhausted, TrivialRestriction
from horofront.exactzd import NEG, POS, restrict, standard_metric
from horofront.functionals import (
    RestrictedFunctional,
    Witness,
    act,
    busemann,
    expand,
    extract_virtual_hom,
    geodesic_depth_check,
    orbit,
    scan_boundary,
)
from horofront.groups import finite_cyclic, infinite_dihedral
from horofront.metrics import WordMetric


def test_busemann_on_free_group():
    m = word_f2()
    F = m.group
    h = busemann(m, F.parse("aab"), 2)
    assert h.value(()) == 0
    assert h.value(F.parse("a")) == -1
    assert h.value(F.parse("aa")) == -2
    assert h.value(F.parse("b")) == 1
    assert h.check_invariants() == []
    assert h.to_json()["provenance"] == {"kind": "witness", "x": "aab"}


def test_key_is_prefix_and_radius_guard():
    m = word_f2()
    h = busemann(m, m.group.parse("abab"), 3)
    assert h.key(1) == h.values[:5]
    assert h.restrict(1).values == h.key(1)
    with pytest.raises(RadiusExhausted):
        h.key(4)


def test_expand_uses_provenance():
    m = word_f2()
    h = busemann(m, m.group.parse("abab"), 2)
    assert expand(m, h, 3) == busemann(m, m.group.parse("abab"), 3)
    bare = RestrictedFunctional(m, 2, h.values)
    assert expand(m, bare, 1).values == h.key(1)
    with pytest.raises(RadiusExhausted):
        expand(m, bare, 3)


def test_act_shrinks_radius():
    m = word_f2()
    F = m.group
    h = busemann(m, F.parse("ab"), 3)
    g = act(m, F.parse("ba"), h)
    assert g.radius == 1
    assert g.provenance == Witness(F.parse("baab"))
    with pytest.raises(RadiusExhausted):
        act(m, F.parse("abab"), h)


def test_scan_z1_finds_both_ends():
    m = standard_metric(1)
    rep = scan_boundary(m, 2, 10, 2)
    assert rep.values_set() == {restrict([POS], 2).values, restrict([NEG], 2).values}
    assert all(c.shell_witnesses > 0 for c in rep.candidates)


def test_scan_is_sorted_and_deterministic():
    m = word_f2()
    a = scan_boundary(m, 2, 8)
    b = scan_boundary(m, 2, 8, workers=2)
    assert [c.values for c in a.candidates] == sorted(c.values for c in a.candidates)
    assert a.to_json() == b.to_json()
    assert len(a.candidates) == 12


def test_orbit_zd_fixed_point_and_finite():
    m = standard_metric(2)
    rep = orbit(m, restrict([POS, NEG], 3), 50)
    assert rep.verdict == "fixed_point" and rep.mode == "exact"
    rep = orbit(m, restrict([POS, 0], 3), 50)
    assert rep.verdict == "exceeded_budget"


def test_orbit_restriction_mode_exhausts():
    m = word_f2()
    h = busemann(m, m.group.parse("ab"), 3)
    bare = RestrictedFunctional(m, 3, h.values)
    rep = orbit(m, bare, 50)
    assert rep.mode == "restriction" and rep.compare_radius == 1


def test_extract_hom_on_dihedral_end():
    m = WordMetric(infinite_dihedral())
    D = m.group
    h = busemann(m, ((30,), 0), 6)
    rep = orbit(m, h, 10, compare_radius=6)
    assert rep.finite
    hom = extract_virtual_hom(m, rep, 6)
    assert hom.failures == 0 and hom.pairs_checked > 0
    r = D.generators[1]
    assert hom.value(r) == -1 or hom.value(D.generators[2]) == -1


def test_extract_hom_guards():
    m = standard_metric(1)
    rep = orbit(m, restrict([3], 2), 3)
    with pytest.raises(NotFiniteOrbit):
        extract_virtual_hom(m, rep, 2)
    # a finite group: every orbit is finite and the stabilizer sees only zeros
    m = WordMetric(finite_cyclic(3))
    rep = orbit(m, busemann(m, ((), 1), 1), 5)
    assert rep.finite
    with pytest.raises(TrivialRestriction):
        extract_virtual_hom(m, rep, 2)


def test_depth_check_on_z2():
    m = standard_metric(2)
    scan = scan_boundary(m, 3, 12, 2)
    depths = geodesic_depth_check(m, scan)
    assert all(d.ok for d in depths)


# property suites, at least 1000 cases each


def _pick(m, r):
    return st.sampled_from(m.ball(r).elements)


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_busemann_invariants(name):
    m = VARIANTS[name]()
    R = 2 * m.max_generator_length()
    ball = m.ball(R).elements

    @given(_pick(m, 3 * R), st.sampled_from(ball), st.sampled_from(ball))
    @settings(max_examples=1000, derandomize=True, deadline=None)
    def check(x, y, z):
        h = busemann(m, x, R)
        assert h.value(m.group.identity) == 0
        assert h.value(y) >= -m.norm(x)
        assert abs(h.value(y) - h.value(z)) <= m.distance(y, z)

    check()


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_action_on_busemann(name):
    m = VARIANTS[name]()
    L = m.max_generator_length()
    R = 2 * L

    @given(_pick(m, L), _pick(m, 3 * R))
    @settings(max_examples=1000, derandomize=True, deadline=None)
    def check(g, x):
        lhs = act(m, g, busemann(m, x, R))
        assert lhs.values == busemann(m, m.group.mul(g, x), lhs.radius).values

    check()


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_action_composition(name):
    m = VARIANTS[name]()
    L = m.max_generator_length()

    @given(_pick(m, L), _pick(m, L), _pick(m, 4 * L))
    @settings(max_examples=1000, derandomize=True, deadline=None)
    def check(g, k, x):
        f = busemann(m, x, 4 * L)
        lhs = act(m, m.group.mul(g, k), f)
        rhs = act(m, g, act(m, k, f))
        r = min(lhs.radius, rhs.radius)
        assert lhs.key(r) == rhs.key(r)

    check()
