import itertools
import random

import pytest

from tdembed.errors import DescriptorMismatch, DivisionByZero, UnknownDescriptor
from tdembed.exactalg import (
    characteristic,
    cm_quaternion,
    cyclic_algebra_inv,
    cyclic_algebra_mul,
    decode,
    descriptor,
    elements,
    gen,
    lam_b,
    multiplicative_order,
    quaternion,
    quaternion_units,
    rational,
    twist,
    zeta,
)
from tdembed.groupcat import catalog


class TestPrimeField:
    def test_arithmetic_mod_p(self, f5):
        assert f5(3) * f5(2) == f5(1)
        assert f5(4) + f5(3) == f5(2)
        assert -f5(1) == f5(4)

    def test_right_division(self, f5):
        assert (f5(3) / f5(2)) * f5(2) == f5(3)

    def test_zero_has_no_inverse(self, f5):
        with pytest.raises(DivisionByZero):
            f5(0).inv()

    def test_multiplicative_order(self, f5):
        assert multiplicative_order(f5(2)) == 4
        assert multiplicative_order(f5(4)) == 2

    def test_non_prime_rejected(self):
        with pytest.raises(UnknownDescriptor):
            descriptor("Fp:6")


class TestGaloisField:
    def test_default_moduli(self):
        assert descriptor("Fq:9").name == "Fq:9:x^2+1"
        assert descriptor("Fq:4").name == "Fq:4:x^2+x+1"
        assert descriptor("Fq:8").name == "Fq:8:x^3+x+1"

    def test_prime_order_collapses_to_prime_field(self):
        assert descriptor("Fq:5") == descriptor("Fp:5")

    def test_generator_squares_to_minus_one_in_f9(self, f9):
        x = gen(f9)
        assert x * x == f9(-1)
        assert x.encode() == [0, 1]

    def test_every_nonzero_element_is_invertible(self, f9):
        elems = elements(f9)
        assert len(elems) == 9
        for a in elems:
            if not a.is_zero():
                assert a * a.inv() == f9.one()

    def test_decode_reads_ascending_coefficients(self, f9):
        assert decode(f9, [1, 2]) == f9(1) + f9(2) * gen(f9)

    def test_characteristic(self, f4, f9):
        assert characteristic(f4) == 2
        assert characteristic(f9) == 3

    def test_reducible_modulus_rejected(self):
        with pytest.raises(UnknownDescriptor):
            descriptor("Fq:9:x^2+2*x+1")

    def test_frobenius_fixes_prime_subfield_only(self, f9):
        fixed = [a for a in elements(f9) if a ** 3 == a]
        assert sorted(a.encode() for a in fixed) == [[0, 0], [1, 0], [2, 0]]


class TestNumberFields:
    def test_cyclotomic_root_has_exact_order(self):
        f = descriptor("Q(zeta:5)")
        z = zeta(f)
        assert z ** 5 == f.one()
        assert z != f.one()
        assert multiplicative_order(z) == 5

    def test_sqrt2(self):
        f = descriptor("Q(sqrt2)")
        r = gen(f)
        assert r * r == f(2)

    def test_rationals(self):
        q = descriptor("Q")
        half = rational(q, 1, 2)
        assert half * q(2) == q.one()
        assert half.encode() == "1/2"

    def test_decode_encode_agree(self):
        f = descriptor("Q(zeta:5)")
        x = zeta(f) * rational(f, 2, 3) + f(1)
        assert decode(f, x.encode()) == x

    def test_mixing_descriptors_fails(self, f5, f9):
        with pytest.raises(DescriptorMismatch):
            f5(1) + f9(1)


class TestQuaternions:
    def test_hamilton_relations(self):
        f = descriptor("H:Q")
        i, j, k = quaternion_units(f)
        assert i * j == k
        assert j * i == -k
        assert i * i == f(-1)

    def test_hurwitz_unit_has_order_six(self):
        f = descriptor("H:Q")
        half = rational(f.base, 1, 2)
        w = quaternion(f, half, half, half, half)
        assert w ** 3 == f(-1)
        assert w ** 6 == f.one()

    def test_inverse_is_two_sided(self):
        f = descriptor("H:Q")
        q = quaternion(f, 1, 2, 3, 4)
        assert q * q.inv() == f.one()
        assert q.inv() * q == f.one()

    def test_cm_pair_conjugates_through_j(self):
        f = descriptor("Hc:Q(zeta:8)")
        j = cm_quaternion(f, 0, 1)
        z = zeta(f)
        assert j * j == f(-1)
        assert j * z == z ** 7 * j

    def test_hc_needs_a_cyclotomic_base(self):
        with pytest.raises(UnknownDescriptor):
            descriptor("Hc:Q(zeta:2)")


class TestCyclicAlgebra:
    def test_cube_of_b(self):
        f = descriptor("Lam36")
        b = lam_b(f)
        assert b * b ** 2 == zeta(f) ** 7

    def test_b_twists_scalars(self):
        f = descriptor("Lam36")
        b = lam_b(f)
        z = zeta(f)
        assert b * z == z ** 16 * b
        assert b * z ** 3 * b.inv() == z ** 6

    def test_inverse(self):
        f = descriptor("Lam36")
        b = lam_b(f)
        x = b + zeta(f)
        assert cyclic_algebra_inv(x) * x == f.one()
        assert x * cyclic_algebra_inv(x) == f.one()

    def test_mul_is_checked(self):
        f = descriptor("Lam36")
        b = lam_b(f)
        assert cyclic_algebra_mul(b, zeta(f)) == b * zeta(f)
        with pytest.raises(DescriptorMismatch):
            cyclic_algebra_mul(zeta(descriptor("Q(zeta:21)")), zeta(descriptor("Q(zeta:21)")))

    def test_twist_has_order_three(self):
        base = descriptor("Q(zeta:21)")
        z = zeta(base)
        assert twist(z) == z ** 16
        assert twist(z, 3) == z


def _pool(name):
    if name.startswith("F"):
        return elements(descriptor(name))
    return list(catalog(name).elements)


def _samples(pool, rng, count=4):
    """a + b*c for random a, b, c from the pool, so non-units show up too."""
    return [rng.choice(pool) + rng.choice(pool) * rng.choice(pool) for _ in range(count)]


class TestAlgebraLaws:
    @pytest.fixture(params=["Fp:7", "Fq:8", "Fq:9", "cyclic:5", "Q8", "Tstar", "Ostar", "Dstar:3", "G792"])
    def values(self, request):
        rng = random.Random(request.param)
        return _samples(_pool(request.param), rng)

    def test_associativity(self, values):
        for x, y, z in itertools.product(values[:3], repeat=3):
            assert (x * y) * z == x * (y * z)
            assert (x + y) + z == x + (y + z)

    def test_distributivity_on_both_sides(self, values):
        for x, y, z in itertools.product(values[:3], repeat=3):
            assert x * (y + z) == x * y + x * z
            assert (y + z) * x == y * x + z * x

    def test_inverses(self, values):
        one = values[0].descriptor.one()
        for x in values:
            assert (x - x).is_zero()
            if not x.is_zero():
                assert x * x.inv() == one == x.inv() * x
