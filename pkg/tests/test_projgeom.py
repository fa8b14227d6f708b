import random

import pytest

from tdembed.errors import DegenerateInput, LineInHyperplane, SingularSystem
from tdembed.exactalg import descriptor, elements, quaternion_units
from tdembed.groupcat import catalog
from tdembed.models import Side
from tdembed.projgeom import (
    additive_frame_change,
    all_points,
    collinear,
    coordinate_hyperplane,
    difference_hyperplane,
    hyperplane,
    incident,
    intersect_hyperplanes,
    invert_matrix,
    line_through,
    point,
    project_from,
    rank_and_solve,
    semidirect_frame_change,
    span_flat,
    third_intersection,
)


class TestCanonicalForms:
    def test_points_scale_to_last_nonzero_one(self, f5):
        assert point(f5, 2, 4, 2) == point(f5, 1, 2, 1)
        assert point(f5, 3, 0, 0).coords[0] == f5.one()

    def test_hyperplanes_scale_to_first_nonzero_one(self, f5):
        assert hyperplane(f5, 0, 2, 4) == hyperplane(f5, 0, 1, 2)

    def test_zero_vector_rejected(self, f5):
        with pytest.raises(DegenerateInput):
            point(f5, 0, 0, 0)
        with pytest.raises(DegenerateInput):
            hyperplane(f5, 0, 0, 0)

    def test_incidence(self, f5):
        h = difference_hyperplane(f5, 2, 1, 2)
        assert incident(point(f5, 3, 1, 1), h)
        assert not incident(point(f5, 3, 1, 2), h)


class TestElimination:
    def test_rank_over_prime_field(self, f5):
        rows = [[f5(1), f5(2), f5(3)], [f5(2), f5(4), f5(2)]]
        rank, basis = rank_and_solve(rows)
        assert rank == 2
        assert len(basis) == 1

    def test_sides_differ_over_quaternions(self):
        f = descriptor("H:Q")
        i, j, k = quaternion_units(f)
        _, right = rank_and_solve([[i, j]], Side.right)
        _, left = rank_and_solve([[i, j]], Side.left)
        assert right == [(k, f.one())]
        assert left == [(-k, f.one())]
        x0, x1 = right[0]
        assert (i * x0 + j * x1).is_zero()
        a0, a1 = left[0]
        assert (a0 * i + a1 * j).is_zero()

    def test_singular_matrix(self, f5):
        with pytest.raises(SingularSystem):
            invert_matrix([[f5(1), f5(2)], [f5(2), f5(4)]])


class TestFlats:
    def test_same_line_from_different_points(self, f5):
        a = span_flat([point(f5, 0, 0, 1), point(f5, 1, 1, 1)])
        b = span_flat([point(f5, 1, 1, 0), point(f5, 1, 1, 1)])
        assert a == b
        assert a.dim == 1

    def test_third_intersection(self, f5):
        line = line_through(point(f5, 0, 0, 1), point(f5, 1, 1, 1))
        assert third_intersection(line, coordinate_hyperplane(f5, 2, 2)) == point(f5, 1, 1, 0)

    def test_line_inside_hyperplane(self, f5):
        line = line_through(point(f5, 1, 0, 0), point(f5, 0, 1, 0))
        with pytest.raises(LineInHyperplane):
            third_intersection(line, coordinate_hyperplane(f5, 2, 2))

    def test_concurrent_and_triangle_intersections(self, f5):
        concurrent = [coordinate_hyperplane(f5, 2, 1), difference_hyperplane(f5, 2, 1, 2), coordinate_hyperplane(f5, 2, 2)]
        meet = intersect_hyperplanes(concurrent)
        assert meet.dim == 0
        assert meet.contains(point(f5, 1, 0, 0))
        triangle = [coordinate_hyperplane(f5, 2, i) for i in range(3)]
        assert intersect_hyperplanes(triangle).dim == -1
        assert intersect_hyperplanes(triangle).is_empty()

    def test_projection(self, f5):
        p = project_from(point(f5, 1, 0, 0), point(f5, 1, 1, 1), coordinate_hyperplane(f5, 2, 0))
        assert p == point(f5, 0, 1, 1)

    def test_collinear(self, f5):
        assert collinear([point(f5, 0, 0, 1), point(f5, 1, 1, 1), point(f5, 1, 1, 0)])
        assert not collinear([point(f5, 0, 0, 1), point(f5, 1, 1, 1), point(f5, 1, 0, 0)])


class TestFrameChanges:
    def test_additive_change_keeps_concurrent_frame(self, f5):
        change = additive_frame_change(f5, [[2]], 3)
        for h in (coordinate_hyperplane(f5, 2, 1), difference_hyperplane(f5, 2, 1, 2), coordinate_hyperplane(f5, 2, 2)):
            assert change.apply_hyperplane(h) == h
        assert change.apply_point(point(f5, 1, 1, 1)) == point(f5, 4, 1, 1)

    def test_incidence_is_preserved(self, f5):
        change = additive_frame_change(f5, [[2]], 3)
        h = hyperplane(f5, 1, 1, 2)
        p = point(f5, 1, 2, 1)
        assert incident(p, h)
        assert incident(change.apply_point(p), change.apply_hyperplane(h))

    def test_singular_semidirect_change(self, f5):
        with pytest.raises(SingularSystem):
            semidirect_frame_change(f5, 0, [], [])


class TestEnumeration:
    @pytest.mark.parametrize("name, d, count", [("Fp:5", 2, 31), ("Fp:2", 3, 15), ("Fq:9", 2, 91)])
    def test_point_counts(self, name, d, count):
        pts = all_points(descriptor(name), d)
        assert len(pts) == count
        assert len(set(pts)) == count


def _scalars(name, rng, count):
    f = descriptor(name)
    if f.is_finite:
        pool = elements(f)
    else:
        pool = list(catalog("Tstar").elements) + [f.zero()]
    return f, [rng.choice(pool) + rng.choice(pool) for _ in range(count)]


class TestInvariants:
    @pytest.mark.parametrize("name", ["Fp:5", "Fq:9", "H:Q"])
    def test_rescaling_changes_nothing(self, name):
        rng = random.Random(name)
        f, xs = _scalars(name, rng, 8)
        units = [x for x in _scalars(name, rng, 6)[1] if not x.is_zero()]
        coords = xs[:4] if any(not c.is_zero() for c in xs[:4]) else [f.one()] + xs[1:4]
        coeffs = xs[4:] if any(not c.is_zero() for c in xs[4:]) else [f.one()] + xs[5:]
        p, h = point(f, *coords), hyperplane(f, *coeffs)
        for lam in units:
            assert point(f, *(c * lam for c in coords)) == p
            assert hyperplane(f, *(lam * c for c in coeffs)) == h
            assert incident(point(f, *(c * lam for c in coords)), h) == incident(p, h)

    @pytest.mark.parametrize("name", ["Fp:5", "Fq:9", "H:Q"])
    @pytest.mark.parametrize("side", [Side.right, Side.left])
    def test_rank_nullity(self, name, side):
        rng = random.Random(f"{name}/{side.value}")
        f, xs = _scalars(name, rng, 10)
        lam, mu = xs[8], xs[9]
        r1, r2 = xs[:4], xs[4:8]
        if side is Side.right:
            r3 = [lam * a + mu * b for a, b in zip(r1, r2)]
        else:
            r3 = [a * lam + b * mu for a, b in zip(r1, r2)]
        rows = [r1, r2, r3]
        rank, basis = rank_and_solve(rows, side)
        assert rank <= 2
        assert rank + len(basis) == 4
        for v in basis:
            for row in rows:
                if side is Side.right:
                    total = sum((a * x for a, x in zip(row, v)), f.zero())
                else:
                    total = sum((x * a for a, x in zip(row, v)), f.zero())
                assert total.is_zero()
