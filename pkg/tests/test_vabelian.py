import pytest

from horofront.errors import FamilyMismatch, HypothesisViolation, InsufficientScanRadius
from horofront.groups import QuotientMap, free_abelian, free_group, infinite_dihedral, quotient_from_spec, rotation_semidirect
from horofront.metrics import WordMetric
from horofront.vabelian import (
    VAStructure,
    build_UT,
    detection_pipeline,
    finite_orbit_pipeline,
    geodesic_ray,
    step_bounds,
    verify_isometric_embedding,
    zd_fixed_point_check,
)


def test_dihedral_construction():
    D = infinite_dihedral()
    c = build_UT(VAStructure(D))
    assert c.K == 3
    assert sorted(D.format(u) for u in c.U) == ["(-3|0)", "(3|0)"]
    assert len(c.T.generators) == 5
    assert c.index == 6
    assert [D.format(geodesic_ray(c, n)) for n in range(3)] == ["(0|0)", "(3|0)", "(6|0)"]


def test_decompose_and_lattice():
    va = VAStructure(infinite_dihedral())
    assert va.decompose(((4,), 1)) == (((4,), 0), ((0,), 1))
    assert va.in_lattice(((3,), 0))


def test_isometric_embedding():
    c = build_UT(VAStructure(infinite_dihedral()))
    rep = verify_isometric_embedding(c, 15)
    assert rep.ok and rep.checked == 31


def test_u_words_are_longer_than_s_words():
    # every x in B_S(4) has |x|_S > |x|_U, which the construction checks itself
    for G in (free_abelian(2), rotation_semidirect(4)):
        c = build_UT(VAStructure(G))
        assert c.K == 2 * c.M * c.va.dim + 1 == 5
    assert build_UT(VAStructure(free_abelian(2))).index == 25


@pytest.mark.parametrize("G", [infinite_dihedral(), free_abelian(2), rotation_semidirect(4)],
                         ids=["D_inf", "Z2", "rot4"])
def test_step_bounds(G):
    sb = step_bounds(VAStructure(G), R=6)
    assert sb.ok and sb.checked > 0


def test_dihedral_pipeline():
    va = VAStructure(infinite_dihedral())
    rep = finite_orbit_pipeline(va, R=6, R_scan=30)
    assert rep.orbit.finite and rep.orbit_size <= 6
    assert zd_fixed_point_check(rep.construction, rep.functional)
    assert rep.to_json()["orbit"]["verdict"] == "finite_orbit"


def test_z2_pipeline_orbit_within_index():
    rep = finite_orbit_pipeline(VAStructure(free_abelian(2)), R=10)
    assert rep.orbit.finite and rep.orbit_size <= rep.construction.index
    assert zd_fixed_point_check(rep.construction, rep.functional)


def test_pipeline_needs_stabilization():
    with pytest.raises(HypothesisViolation):
        finite_orbit_pipeline(VAStructure(infinite_dihedral()), R=6, R_scan=3)


def test_detection_rank_one_target():
    F = free_group(2)
    pi = quotient_from_spec({"target": {"family": "free_abelian", "dim": 1}, "images": [[1], [0]]}, source=F)
    rep = detection_pipeline(F, pi, R=2, R_scan=10, full_scan=False)
    assert (rep.C, rep.M, rep.f_orbit_size) == (1, 2, 1)
    assert rep.fixed_radii == [0, 1, 2]
    assert rep.hom.value(F.parse("a")) == -2 and rep.hom.failures == 0
    # the shell at R_scan=12 is too shallow for B_D(4)
    with pytest.raises(InsufficientScanRadius):
        detection_pipeline(F, pi, R=4, R_scan=12, full_scan=False)


def test_detection_through_virtually_abelian_target():
    D = infinite_dihedral()
    pi = QuotientMap(D, D, D.family_generators())
    rep = detection_pipeline(D, pi, R=24, R_scan=44, scan_radius=4)
    assert (rep.C, rep.M, rep.K) == (3, 4, 3)
    assert rep.f_orbit_size <= rep.h_orbit_size == 6
    vals = dict(rep.hom.to_json(D)["generator_values"])
    assert vals == {"(-3|0)": 4, "(3|0)": -4}
    assert rep.hom.failures == 0


def test_detection_rejects_mismatched_quotient():
    F = free_group(2)
    pi = quotient_from_spec({"target": {"family": "free_abelian", "dim": 1}, "images": [[1], [0]]}, source=F)
    with pytest.raises(FamilyMismatch):
        detection_pipeline(free_group(3), pi)
