import pytest

from tdembed.config import Settings
from tdembed.errors import SearchSpaceTooLarge, SideTooSmall, UnsupportedSize
from tdembed.models import FrameShape
from tdembed.oracle import PGSpace, field_for, search_td_on_frame


class TestSpaces:
    @pytest.mark.parametrize("q, d, points, per_line", [(2, 2, 7, 3), (5, 2, 31, 6), (9, 2, 91, 10), (2, 3, 15, 7)])
    def test_counts(self, q, d, points, per_line):
        r = PGSpace.enumerate(q, d).report()
        assert r.points == points
        assert r.hyperplanes == points
        assert r.points_per_hyperplane == [per_line]
        assert r.hyperplanes_per_point == [per_line]

    def test_non_prime_power_or_large_q(self):
        with pytest.raises(UnsupportedSize):
            PGSpace.enumerate(6, 2)
        with pytest.raises(UnsupportedSize):
            PGSpace.enumerate(11, 2)

    def test_field_for(self):
        assert field_for(5).name == "Fp:5"
        assert field_for(9).name == "Fq:9:x^2+1"


class TestFrameSearch:
    def test_concurrent_frame_over_f3(self):
        r = search_td_on_frame(PGSpace.enumerate(3, 2), FrameShape.concurrent, 3)
        assert r.found > 0
        assert len(r.classes) == 1
        assert all(c.elementary_abelian and c.coset_pattern for c in r.classes)
        assert sum(c.class_size for c in r.classes) == r.found

    def test_triangle_frame_over_f4(self):
        r = search_td_on_frame(PGSpace.enumerate(4, 2), FrameShape.triangle, 3)
        assert r.found > 0
        assert len(r.classes) == 1
        assert all(c.cyclic and c.coset_pattern for c in r.classes)

    def test_triangle_frame_over_f5_is_too_short_for_n5(self):
        # q - 1 = 4 points per line off the vertices, so no TD(3, 5) can even be placed
        r = search_td_on_frame(PGSpace.enumerate(5, 2), FrameShape.triangle, 5)
        assert r.vacuous
        assert r.usable_per_line == [4, 4, 4]
        assert r.candidates == 0
        assert r.found == 0
        assert r.classes == []

    def test_usable_points_are_reported(self):
        r = search_td_on_frame(PGSpace.enumerate(5, 2), FrameShape.triangle, 4)
        assert not r.vacuous
        assert r.usable_per_line == [4, 4, 4]
        assert r.candidates == 1
        assert r.found > 0

    def test_side_too_small(self):
        with pytest.raises(SideTooSmall):
            search_td_on_frame(PGSpace.enumerate(3, 2), FrameShape.triangle, 2)

    def test_plane_only(self):
        with pytest.raises(UnsupportedSize):
            search_td_on_frame(PGSpace.enumerate(2, 3), FrameShape.triangle, 3)

    def test_search_bound(self, monkeypatch):
        monkeypatch.setattr("tdembed.oracle.SETTINGS", Settings(search_bound=10))
        with pytest.raises(SearchSpaceTooLarge):
            search_td_on_frame(PGSpace.enumerate(5, 2), FrameShape.concurrent, 3)
