import pytest

from tdembed.design import (
    LatinSquare,
    Transversal,
    TransversalDesign,
    check_loop,
    check_orthogonal,
    elementary_abelian_prime,
    find_isomorphism,
    find_transversals,
    is_cyclic,
    latin_to_td,
    loop_operation,
    mols_to_td,
    td_to_latin,
    td_to_mols,
    validate_latin_square,
    validate_td,
    validate_transversal,
)
from tdembed.errors import NotBlockSize3, NotOrthogonal, SideMismatch, SideTooSmall
from tdembed.models import ViolationCode

KLEIN = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]


class TestLatinSquares:
    def test_cyclic_square_is_latin(self):
        assert validate_latin_square(LatinSquare.cyclic(5)) is None

    def test_row_repeat(self):
        ls = LatinSquare.of([[0, 0, 2], [1, 2, 0], [2, 1, 1]])
        assert validate_latin_square(ls).code == ViolationCode.row_repeat

    def test_symbol_out_of_range(self):
        ls = LatinSquare.of([[0, 1, 3], [1, 2, 0], [2, 0, 1]])
        assert validate_latin_square(ls).code == ViolationCode.symbol_out_of_range

    def test_side_too_small(self):
        with pytest.raises(SideTooSmall):
            validate_latin_square(LatinSquare.of([[0, 1], [1, 0]]))

    def test_payload_round_trip(self):
        ls = LatinSquare.cyclic(4)
        assert LatinSquare.from_payload(ls.to_payload()) == ls


class TestTransversals:
    @pytest.mark.parametrize("n, count", [(3, 3), (4, 0), (5, 15)])
    def test_cyclic_counts(self, n, count):
        ls = LatinSquare.cyclic(n)
        found = find_transversals(ls)
        assert len(found) == count
        for t in found:
            assert validate_transversal(ls, t) is None

    def test_parallel_search_agrees(self):
        ls = LatinSquare.cyclic(5)
        assert find_transversals(ls, jobs=2) == find_transversals(ls)

    def test_limit(self):
        assert len(find_transversals(LatinSquare.cyclic(5), limit=2)) == 2

    def test_symbol_repeat(self):
        ls = LatinSquare.cyclic(3)
        assert validate_transversal(ls, Transversal((0, 2, 1))).code == ViolationCode.transversal_symbol_repeat

    def test_not_a_permutation(self):
        ls = LatinSquare.cyclic(3)
        assert validate_transversal(ls, Transversal((0, 0, 1))).code == ViolationCode.not_a_permutation


class TestOrthogonality:
    def test_linear_squares(self):
        ok, v = check_orthogonal(LatinSquare.linear(5, 1), LatinSquare.linear(5, 2))
        assert ok and v is None

    def test_square_with_itself(self):
        ls = LatinSquare.linear(5, 1)
        ok, v = check_orthogonal(ls, ls)
        assert not ok
        assert v.code == ViolationCode.pair_collision

    def test_side_mismatch(self):
        with pytest.raises(SideMismatch):
            check_orthogonal(LatinSquare.cyclic(3), LatinSquare.cyclic(4))


class TestTransversalDesigns:
    def test_complete_mols_give_td6_5(self):
        squares = [LatinSquare.linear(5, s) for s in range(1, 5)]
        td = mols_to_td(squares)
        assert td.k == 6
        assert validate_td(td) is None
        assert td_to_mols(td) == squares

    def test_non_orthogonal_mols(self):
        ls = LatinSquare.linear(5, 1)
        with pytest.raises(NotOrthogonal):
            mols_to_td([ls, ls])

    def test_latin_square_with_transversal(self):
        ls = LatinSquare.cyclic(5)
        t = find_transversals(ls, limit=1)[0]
        td = latin_to_td(ls, t)
        assert len(td.T) == 5
        assert validate_td(td) is None
        assert td_to_latin(td) == ls

    def test_missing_block(self):
        td = latin_to_td(LatinSquare.cyclic(3))
        broken = TransversalDesign(td.k, td.n, td.parts, td.blocks[1:])
        assert validate_td(broken).code == ViolationCode.pair_uncovered

    def test_repeated_block(self):
        td = latin_to_td(LatinSquare.cyclic(3))
        broken = TransversalDesign(td.k, td.n, td.parts, td.blocks + td.blocks[:1])
        assert validate_td(broken).code == ViolationCode.pair_covered_twice

    def test_bad_partition_T(self):
        td = latin_to_td(LatinSquare.cyclic(3))
        broken = td.with_T(td.blocks[:3])
        assert validate_td(broken).code == ViolationCode.t_not_partition

    def test_only_block_size_three_is_a_square(self):
        td = mols_to_td([LatinSquare.linear(5, 1), LatinSquare.linear(5, 2)])
        with pytest.raises(NotBlockSize3):
            td_to_latin(td)


class TestLoops:
    def test_cyclic_group_loop(self):
        loop = loop_operation(latin_to_td(LatinSquare.cyclic(5)))
        assert check_loop(loop) is None
        assert loop.associative and loop.abelian
        assert elementary_abelian_prime(loop) == 5
        assert is_cyclic(loop)

    def test_z4_is_not_elementary_abelian(self):
        loop = loop_operation(latin_to_td(LatinSquare.cyclic(4)))
        assert elementary_abelian_prime(loop) is None
        assert is_cyclic(loop)

    def test_klein_group(self):
        loop = loop_operation(latin_to_td(LatinSquare.of(KLEIN)))
        assert elementary_abelian_prime(loop) == 2
        assert not is_cyclic(loop)

    def test_isomorphism(self):
        z4 = LatinSquare.cyclic(4).cells
        assert find_isomorphism(z4, KLEIN) is None
        perm = [0, 3, 1, 2]
        relabeled = [[0] * 4 for _ in range(4)]
        for a in range(4):
            for b in range(4):
                relabeled[perm[a]][perm[b]] = perm[z4[a][b]]
        phi = find_isomorphism(z4, relabeled)
        assert phi is not None
        assert all(phi[z4[a][b]] == relabeled[phi[a]][phi[b]] for a in range(4) for b in range(4))
