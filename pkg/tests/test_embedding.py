from dataclasses import replace

import pytest

from tdembed.design import TransversalDesign, validate_td
from tdembed.embedding import (
    EmbeddedTD,
    add_part,
    attach_transversal_point,
    check_improper_transversal,
    classify,
    compute_DG,
    construct_additive,
    construct_multiplicative,
    construct_semidirect,
    extend_to_max_td,
    extract_group,
    frame_of,
    from_payload,
    is_transversal_point,
    orbit_candidates,
    to_payload,
    transform_embedding,
    transversal_points,
    verify_embedding,
)
from tdembed.errors import (
    CharZeroConcurrentImpossible,
    DimensionTooSmall,
    ExtensionUndefined,
    GroupTooSmall,
    NonStandardFrame,
    NotATransversalPoint,
    NothingToExtend,
    PartRejected,
    PointOnPartHyperplane,
    WrongClassification,
)
from tdembed.exactalg import descriptor, elements, gen, zeta
from tdembed.groupcat import (
    GeneratedGroup,
    additive_group,
    catalog,
    group_equivalence,
    multiplicative_group,
    semidirect_cyclic,
    semidirect_group,
)
from tdembed.models import FrameKind, GroupKind, ViolationCode
from tdembed.oracle import brute_transversal_points
from tdembed.projgeom import FrameChange, additive_frame_change, hyperplane, incident, point


@pytest.fixture(scope="module")
def additive_f5(whole_field):
    return construct_additive(whole_field(descriptor("Fp:5")))


@pytest.fixture(scope="module")
def f3_in_f9(prime_subfield):
    return construct_additive(prime_subfield(descriptor("Fq:9")))


@pytest.fixture(scope="module")
def pure_translations():
    f9 = descriptor("Fq:9")
    return construct_semidirect(semidirect_group(f9, [(1, [1])], 1))


@pytest.fixture(scope="module")
def zeta5_orbit():
    return construct_semidirect(semidirect_cyclic(zeta(descriptor("Q(zeta:5)")), [1]))


@pytest.fixture(scope="module")
def affine_f4():
    """AGL(1, 4): x -> c x + t."""
    f4 = descriptor("Fq:4")
    return construct_semidirect(semidirect_group(f4, [(gen(f4), [0]), (1, [1])], 1))


class TestConstructions:
    def test_additive_frame(self, additive_f5):
        r = verify_embedding(additive_f5)
        assert r.ok
        assert r.proper
        assert r.flat_dim == 0
        assert frame_of(additive_f5) is FrameKind.additive
        assert (additive_f5.td.k, additive_f5.td.n) == (3, 5)

    def test_triangle_over_f4(self, f4):
        e = construct_multiplicative(multiplicative_group(f4, [gen(f4)]))
        r = verify_embedding(e)
        assert r.ok
        assert r.flat_dim == -1
        assert frame_of(e) is FrameKind.multiplicative

    def test_quaternion_group(self):
        e = construct_multiplicative(catalog("Q8"))
        assert len(e.points) == 24
        assert verify_embedding(e).ok

    def test_zeta_orbit_lies_in_a_hyperplane(self, zeta5_orbit):
        # translation part of (z^k, x) is (z^k - 1)/(z - 1)
        f = zeta5_orbit.descriptor
        z = zeta(f)
        r = verify_embedding(zeta5_orbit)
        assert r.ok
        assert not r.proper
        assert r.flat_dim == 0
        h = hyperplane(f, 1, 1, -1, -(z - f.one()))
        assert all(incident(p, h) for p in zeta5_orbit.points)

    def test_affine_group_is_proper(self, affine_f4):
        assert affine_f4.group.order == 12
        r = verify_embedding(affine_f4)
        assert r.ok
        assert r.proper
        assert r.flat_dim == affine_f4.d - 3 == 0

    def test_concurrent_frame_needs_char_p(self):
        q = descriptor("Q")
        g = GeneratedGroup.from_elements(GroupKind.additive, q, 1, [(q.zero(),)])
        with pytest.raises(CharZeroConcurrentImpossible):
            construct_additive(g)

    def test_group_too_small(self):
        with pytest.raises(GroupTooSmall):
            construct_additive(additive_group(descriptor("Fp:2"), 1, [[1]]))

    def test_dimension_too_small(self):
        with pytest.raises(DimensionTooSmall):
            construct_multiplicative(catalog("cyclic:5"), d=1)


class TestVerification:
    def test_coinciding_points(self, additive_f5):
        pts = list(additive_f5.points)
        pts[1] = pts[0]
        r = verify_embedding(replace(additive_f5, points=tuple(pts)))
        assert not r.ok
        assert r.violation.code == ViolationCode.not_injective

    def test_point_off_its_hyperplane(self, additive_f5):
        hs = additive_f5.part_hyperplanes
        r = verify_embedding(replace(additive_f5, part_hyperplanes=(hs[0], hs[1], hs[0])))
        assert r.violation.code == ViolationCode.point_off_hyperplane

    def test_block_off_a_line(self, additive_f5, f5):
        # the frame centre [1, 0, 0] takes the place of a point of the first part
        pts = list(additive_f5.points)
        pts[0] = point(f5, 1, 0, 0)
        r = verify_embedding(replace(additive_f5, points=tuple(pts)))
        assert not r.ok
        assert r.violation.code == ViolationCode.block_not_collinear

    def test_two_blocks_on_one_line(self, f9):
        # all nine points on x_2 = x_3 = 0, which lies in every part hyperplane
        blocks = [(a, 3 + b, 6 + (a + b) % 3) for a in range(3) for b in range(3)]
        pts = tuple(point(f9, a, 1, 0, 0) for a in elements(f9))
        hs = (hyperplane(f9, 0, 0, 1, 0), hyperplane(f9, 0, 0, 0, 1), hyperplane(f9, 0, 0, 1, -1))
        e = EmbeddedTD(TransversalDesign.standard(3, 3, blocks), pts, hs, f9, 3)
        r = verify_embedding(e)
        assert not r.ok
        assert r.violation.code == ViolationCode.lines_not_distinct

    def test_block_line_inside_a_part_hyperplane(self, additive_f5, f5):
        # lift the plane into x_3 = 0 of P^3 and use that plane for the first part
        pts = tuple(point(f5, *p.coords, 0) for p in additive_f5.points)
        hs = (hyperplane(f5, 0, 0, 0, 1),) + tuple(hyperplane(f5, *h.coeffs, 0) for h in additive_f5.part_hyperplanes[1:])
        e = EmbeddedTD(additive_f5.td, pts, hs, f5, 3)
        r = verify_embedding(e)
        assert not r.ok
        assert r.violation.code == ViolationCode.line_in_hyperplane
        assert r.violation.witness["part"] == 0


class TestCoordinatization:
    def test_additive_group_is_read_back(self, whole_field, f5):
        g = whole_field(f5)
        co = extract_group(construct_additive(g))
        assert co.isomorphic
        assert set(co.group.elements) == set(g.elements)

    def test_any_base_points_give_the_group(self, additive_f5):
        co = extract_group(additive_f5, one1=2, one2=8)
        assert co.isomorphic

    @pytest.mark.parametrize("fixture", ["zeta5_orbit", "affine_f4", "pure_translations"])
    def test_semidirect_group_is_read_back(self, request, fixture):
        e = request.getfixturevalue(fixture)
        co = extract_group(e)
        assert co.isomorphic
        assert co.group.kind is GroupKind.semidirect
        assert set(co.group.elements) == set(e.group.elements)

    def test_f9_shifted_base_points_give_an_equivalent_group(self, whole_field, f9):
        g = whole_field(f9)
        e = construct_additive(g)
        co = extract_group(e, one1=4, one2=13)
        assert co.base_points == (4, 13)
        assert co.isomorphic
        assert group_equivalence(co.group, g, GroupKind.additive) is not None

    def test_quaternion_group_is_read_back(self):
        co = extract_group(construct_multiplicative(catalog("Q8")))
        assert co.isomorphic
        assert co.group.order == 8
        assert not co.loop.abelian

    def test_triangle_needs_standard_base_points(self):
        e = construct_multiplicative(catalog("Q8"))
        with pytest.raises(NonStandardFrame):
            extract_group(e, one1=1, one2=8)

    def test_external_frame(self, additive_f5):
        f = additive_f5.descriptor
        swap = FrameChange(tuple(
            tuple(f.one() if j == (i + 1) % 3 else f.zero() for j in range(3)) for i in range(3)))
        moved = transform_embedding(additive_f5, swap)
        assert moved.frame is FrameKind.external
        assert verify_embedding(moved).ok
        with pytest.raises(NonStandardFrame):
            extract_group(moved)

    def test_frame_change_keeps_the_group(self, additive_f5, f5):
        moved = transform_embedding(additive_f5, additive_frame_change(f5, [[2]], 3))
        assert moved.frame is FrameKind.additive
        assert verify_embedding(moved).ok
        assert extract_group(moved).isomorphic


class TestTransversalPoints:
    @pytest.mark.parametrize("name, which, count", [
        ("Fp:5", "whole", 15),
        ("Fq:4", "whole", 8),
        ("Fq:9", "prime", 3),
        ("Fq:9", "whole", 63),
        ("Fq:8", "whole", 48),
    ])
    def test_formula_matches_brute_force(self, whole_field, prime_subfield, name, which, count):
        f = descriptor(name)
        g = whole_field(f) if which == "whole" else prime_subfield(f)
        e = construct_additive(g)
        tps = transversal_points(e)
        assert len(tps.points) == count == g.order * (tps.dg.size - 2)
        assert set(tps.points) == set(brute_transversal_points(e))

    def test_dg_of_prime_subfield(self, prime_subfield, f9):
        dg = compute_DG(prime_subfield(f9))
        assert dg.size == 3
        assert dg.is_subfield()

    def test_attach(self, f3_in_f9):
        q = transversal_points(f3_in_f9).points[0]
        assert is_transversal_point(f3_in_f9, q)
        e = attach_transversal_point(f3_in_f9, q)
        assert len(e.td.T) == 3
        assert validate_td(e.td) is None
        assert verify_embedding(e).ok

    def test_off_group_point_is_rejected(self, f3_in_f9, f9):
        q = point(f9, gen(f9), 2, 1)
        assert not transversal_points(f3_in_f9).contains(q)
        with pytest.raises(NotATransversalPoint):
            attach_transversal_point(f3_in_f9, q)

    def test_point_on_a_part_hyperplane(self, additive_f5, f5):
        with pytest.raises(PointOnPartHyperplane):
            is_transversal_point(additive_f5, point(f5, 1, 0, 1))

    def test_triangle_frame_has_no_formula(self, f4):
        e = construct_multiplicative(multiplicative_group(f4, [gen(f4)]))
        with pytest.raises(WrongClassification):
            transversal_points(e)


class TestExtension:
    @pytest.mark.parametrize("name, which, k, n", [
        ("Fp:5", "whole", 6, 5),
        ("Fq:9", "whole", 10, 9),
        ("Fq:9", "prime", 4, 3),
    ])
    def test_maximal_designs(self, whole_field, prime_subfield, name, which, k, n):
        f = descriptor(name)
        g = whole_field(f) if which == "whole" else prime_subfield(f)
        e = extend_to_max_td(construct_additive(g))
        assert (e.td.k, e.td.n) == (k, n)
        assert validate_td(e.td) is None
        assert verify_embedding(e).ok

    def test_outside_dg_breaks_the_design(self, f3_in_f9, f9):
        with pytest.raises(PartRejected) as err:
            add_part(f3_in_f9, gen(f9))
        assert err.value.witness["code"] == "pair_uncovered"

    def test_nothing_to_extend(self, f8):
        g = additive_group(f8, 1, [[1], [gen(f8)]])
        assert compute_DG(g).size == 2
        with pytest.raises(NothingToExtend):
            extend_to_max_td(construct_additive(g))

    def test_improper_input_is_not_extended(self, f9):
        e = construct_additive(additive_group(f9, 2, [[1, 0]]))
        assert not e.proper()
        with pytest.raises(ExtensionUndefined):
            extend_to_max_td(e)


class TestImproperTransversal:
    def test_pure_translations_lie_in_a_hyperplane(self, pure_translations, f9):
        assert verify_embedding(pure_translations).ok
        assert not pure_translations.proper()
        q = point(f9, 1, 1, 2, 0)
        assert is_transversal_point(pure_translations, q)
        r = check_improper_transversal(pure_translations, q)
        assert r.points_contained and r.infinity_contained
        assert r.verdict.startswith("contained")
        assert verify_embedding(attach_transversal_point(pure_translations, q)).ok

    def test_proper_embedding_has_no_transversal_point(self, affine_f4):
        assert affine_f4.proper()
        assert brute_transversal_points(affine_f4) == []
        with pytest.raises(WrongClassification):
            transversal_points(affine_f4)
        off_frame = [q for q in orbit_candidates(affine_f4)
                     if not any(incident(q, h) for h in affine_f4.part_hyperplanes)]
        assert off_frame
        assert not any(is_transversal_point(affine_f4, q) for q in off_frame)

    def test_zeta_orbit_misses_the_sum_hyperplane(self, zeta5_orbit):
        # improper, but not inside x_1 + x_2 - x_3 = 0, so no transversal point
        f = zeta5_orbit.descriptor
        r = check_improper_transversal(zeta5_orbit, point(f, 1, 1, 1, 1))
        assert not r.points_contained
        assert not r.is_transversal_point
        assert r.verdict == "not a transversal point"
        off_frame = [q for q in orbit_candidates(zeta5_orbit)
                     if not any(incident(q, h) for h in zeta5_orbit.part_hyperplanes)]
        assert not any(is_transversal_point(zeta5_orbit, q) for q in off_frame)

    def test_plane_case(self, f4):
        e = construct_multiplicative(multiplicative_group(f4, [gen(f4)]))
        r = check_improper_transversal(e, point(f4, 1, 1, 1))
        assert r.verdict.startswith("impossible")


class TestClassification:
    def test_concurrent(self, additive_f5):
        r = classify(additive_f5)
        assert r.shape == "concurrent"
        assert r.loop_elementary_abelian
        assert all(c.holds for c in r.conclusions)
        assert r.explanation

    def test_triangle(self, f4):
        r = classify(construct_multiplicative(multiplicative_group(f4, [gen(f4)])))
        assert r.shape == "triangle"
        assert r.loop_associative and r.loop_abelian
        assert all(c.holds for c in r.conclusions)

    def test_improper_semidirect(self, pure_translations):
        r = classify(pure_translations)
        assert r.shape == "d-3"
        assert not r.proper
        assert [c.rule for c in r.conclusions] == ["improper_when_additive_alternative"]
        assert r.conclusions[0].holds


class TestPayload:
    def test_round_trip_with_transversal_point(self, f3_in_f9):
        e = attach_transversal_point(f3_in_f9, transversal_points(f3_in_f9).points[0])
        back = from_payload(to_payload(e))
        assert isinstance(back, EmbeddedTD)
        assert back.points == e.points
        assert back.part_hyperplanes == e.part_hyperplanes
        assert back.td == e.td
        assert back.infinity == e.infinity
        assert verify_embedding(back).ok
