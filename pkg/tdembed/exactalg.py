"""
Exact arithmetic for the skew fields used by the embedding constructions.

Every value is a `Scalar`: an immutable pair (descriptor, payload).  The payload
is a canonical, hashable encoding, so equality is payload equality:

  prime field F_p        int residue in [0, p)
  finite field F_q       int index in [0, q); base-p digits are the ascending
                         coefficients of the residue polynomial
  rationals Q            sympy QQ element (lowest terms, positive denominator)
  number field Q[x]/(m)  stripped dense tuple of QQ, highest degree first
                         (sympy's "dup" layout), reduced modulo m
  quaternions over F     (a, b, c, d) base payloads for a + bi + cj + dk
  Hc over Q(zeta_m)      (z, w) base payloads for z + w*j, j*z = conj(z)*j
  Lam36                  (c0, c1, c2) Q(zeta_21) payloads for c0 + b*c1 + b^2*c2

Polynomial work is delegated to sympy's dense toolkits (densearith, euclidtools,
galoistools); this module only wires them into rings.
"""
from __future__ import annotations
import itertools
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Iterator, List, Optional, Sequence, Tuple

from sympy import Poly, Symbol, cyclotomic_poly, factorint, isprime
from sympy.parsing.sympy_parser import parse_expr
from sympy.polys.densearith import dup_add, dup_mul, dup_mul_ground, dup_neg, dup_rem, dup_sub
from sympy.polys.densebasic import dup_strip
from sympy.polys.domains import QQ, ZZ
from sympy.polys.euclidtools import dup_invert
from sympy.polys.galoistools import gf_irreducible_p, gf_mul, gf_rem
from sympy.polys.polyerrors import NotInvertible

from .errors import (
    DescriptorMismatch,
    DivisionByZero,
    FormatError,
    SingularSystem,
    UnknownDescriptor,
)
from .models import FieldKind

log = logging.getLogger(__name__)

_X = Symbol("x")

# Lam's cyclic algebra: b*zeta = zeta^16*b, b^3 = zeta^7, zeta a primitive 21st root of unity.
LAM_ORDER = 21
LAM_TWIST = 16
LAM_CUBE = 7
_MEMO = 1 << 16


# ---------- QQ text codec ----------
def _qq_text(a) -> str:
    num, den = int(QQ.numer(a)), int(QQ.denom(a))
    return str(num) if den == 1 else f"{num}/{den}"


def _qq_parse(obj) -> Any:
    if isinstance(obj, bool):
        raise FormatError(f"not a rational: {obj!r}")
    if isinstance(obj, int):
        return QQ(obj)
    if isinstance(obj, str):
        m = re.fullmatch(r"\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?", obj)
        if m:
            den = int(m.group(2) or 1)
            if den == 0:
                raise FormatError(f"zero denominator in {obj!r}")
            return QQ(int(m.group(1)), den)
    raise FormatError(f"not a rational: {obj!r}")


# ---------- ring backends (payload level) ----------
class _Ring:
    """Arithmetic on raw payloads. Subclasses fix the encoding."""

    characteristic = 0
    commutative = True
    size: Optional[int] = None

    zero: Any
    one: Any

    def is_zero(self, a) -> bool:
        return a == self.zero

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def neg(self, a):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def from_int(self, n: int):
        raise NotImplementedError

    def encode(self, a):
        raise NotImplementedError

    def decode(self, obj):
        raise NotImplementedError

    def elements(self) -> Iterator[Any]:
        raise FormatError("element enumeration needs a finite field")


class _PrimeField(_Ring):
    def __init__(self, p: int):
        self.p = p
        self.characteristic = p
        self.size = p
        self.zero, self.one = 0, 1

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        return pow(a, -1, self.p)

    def from_int(self, n):
        return n % self.p

    def encode(self, a):
        return a

    def decode(self, obj):
        if isinstance(obj, bool) or not isinstance(obj, int):
            raise FormatError(f"F_{self.p} element must be an integer residue, got {obj!r}")
        return obj % self.p

    def elements(self):
        return iter(range(self.p))


class _GaloisField(_Ring):
    """F_q = F_p[x]/(m) with full addition/multiplication tables."""

    def __init__(self, p: int, s: int, modulus: Tuple[int, ...]):
        self.p, self.s = p, s
        self.modulus = list(modulus)
        self.characteristic = p
        self.size = p ** s
        self.zero, self.one = 0, 1
        q = self.size
        polys = [self._poly(i) for i in range(q)]
        index = {tuple(self._digits(i)): i for i in range(q)}

        def to_index(f):
            digits = [0] * s
            for k, c in enumerate(reversed(f)):
                digits[k] = c % p
            return index[tuple(digits)]

        self._add = [[to_index(self._poly_from_digits([(x + y) % p for x, y in zip(self._digits(a), self._digits(b))]))
                      for b in range(q)] for a in range(q)]
        self._mul = [[to_index(gf_rem(gf_mul(polys[a], polys[b], p, ZZ), self.modulus, p, ZZ))
                      for b in range(q)] for a in range(q)]
        self._neg = [self._add[a].index(0) for a in range(q)]
        self._inv = [None] + [self._mul[a].index(1) for a in range(1, q)]

    def _digits(self, i: int) -> List[int]:
        out = []
        for _ in range(self.s):
            i, r = divmod(i, self.p)
            out.append(r)
        return out

    def _poly_from_digits(self, digits: Sequence[int]) -> List[int]:
        return dup_strip(list(reversed(list(digits))))

    def _poly(self, i: int) -> List[int]:
        return self._poly_from_digits(self._digits(i))

    def add(self, a, b):
        return self._add[a][b]

    def sub(self, a, b):
        return self._add[a][self._neg[b]]

    def neg(self, a):
        return self._neg[a]

    def mul(self, a, b):
        return self._mul[a][b]

    def inv(self, a):
        return self._inv[a]

    def from_int(self, n):
        return n % self.p

    def encode(self, a):
        return self._digits(a)

    def decode(self, obj):
        if isinstance(obj, list) and len(obj) == self.s and all(isinstance(c, int) and not isinstance(c, bool) for c in obj):
            return sum((c % self.p) * self.p ** k for k, c in enumerate(obj))
        raise FormatError(f"F_{self.size} element must be {self.s} ascending coefficients, got {obj!r}")

    def elements(self):
        return iter(range(self.size))


class _Rationals(_Ring):
    def __init__(self):
        self.zero, self.one = QQ.zero, QQ.one

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        return QQ.one / a

    def from_int(self, n):
        return QQ(n)

    def encode(self, a):
        return _qq_text(a)

    def decode(self, obj):
        return _qq_parse(obj)


class _NumberField(_Ring):
    """Q[x]/(m) on stripped dense tuples; products and inverses are memoized."""

    def __init__(self, minpoly: Sequence, cyclotomic_order: Optional[int] = None):
        self.mod = [QQ.convert(c) for c in minpoly]
        self.degree = len(self.mod) - 1
        self.cyclotomic_order = cyclotomic_order
        self.zero, self.one = (), (QQ.one,)
        self.mul = lru_cache(maxsize=_MEMO)(self._mul)
        self.inv = lru_cache(maxsize=_MEMO)(self._inv)
        self._power_maps = {}

    def is_zero(self, a):
        return not a

    def _reduce(self, f) -> tuple:
        return tuple(dup_rem(f, self.mod, QQ))

    def add(self, a, b):
        return tuple(dup_add(list(a), list(b), QQ))

    def sub(self, a, b):
        return tuple(dup_sub(list(a), list(b), QQ))

    def neg(self, a):
        return tuple(dup_neg(list(a), QQ))

    def _mul(self, a, b):
        if not a or not b:
            return ()
        return self._reduce(dup_mul(list(a), list(b), QQ))

    def _inv(self, a):
        try:
            return tuple(dup_invert(list(a), self.mod, QQ))
        except NotInvertible as e:
            raise SingularSystem(f"minimal polynomial is reducible: {a!r} is a zero divisor") from e

    def from_int(self, n):
        return tuple(dup_strip([QQ(n)]))

    def monomial(self, e: int) -> tuple:
        return self._reduce([QQ.one] + [QQ.zero] * e)

    def power_map(self, e: int):
        """Ring map x -> x^e (an automorphism of Q(zeta_m) for gcd(e, m) = 1)."""
        if e not in self._power_maps:
            images = [self.monomial((e * k) % (self.cyclotomic_order or 0) if self.cyclotomic_order else e * k)
                      for k in range(self.degree)]

            @lru_cache(maxsize=_MEMO)
            def apply(a):
                out = []
                for k, c in enumerate(reversed(a)):
                    if c:
                        out = dup_add(out, dup_mul_ground(list(images[k]), c, QQ), QQ)
                return tuple(out)

            self._power_maps[e] = apply
        return self._power_maps[e]

    def encode(self, a):
        coeffs = list(reversed(a)) + [QQ.zero] * (self.degree - len(a))
        return [_qq_text(c) for c in coeffs]

    def decode(self, obj):
        if not isinstance(obj, list) or len(obj) != self.degree:
            raise FormatError(f"number-field element must be {self.degree} ascending rationals, got {obj!r}")
        return self._reduce(dup_strip([_qq_parse(c) for c in reversed(obj)]))


class _Quaternion(_Ring):
    """Hamilton quaternions a + bi + cj + dk over a commutative base ring."""

    commutative = False

    def __init__(self, base: _Ring):
        self.base = base
        self.characteristic = base.characteristic
        z, o = base.zero, base.one
        self.zero, self.one = (z, z, z, z), (o, z, z, z)

    def _m(self, x, y):
        B = self.base
        if B.is_zero(x) or B.is_zero(y):
            return B.zero
        return B.mul(x, y)

    def add(self, a, b):
        add = self.base.add
        return tuple(add(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        sub = self.base.sub
        return tuple(sub(x, y) for x, y in zip(a, b))

    def neg(self, a):
        return tuple(self.base.neg(x) for x in a)

    def mul(self, a, b):
        B, m = self.base, self._m
        a1, b1, c1, d1 = a
        a2, b2, c2, d2 = b
        return (
            B.sub(B.sub(B.sub(m(a1, a2), m(b1, b2)), m(c1, c2)), m(d1, d2)),
            B.sub(B.add(B.add(m(a1, b2), m(b1, a2)), m(c1, d2)), m(d1, c2)),
            B.add(B.add(B.sub(m(a1, c2), m(b1, d2)), m(c1, a2)), m(d1, b2)),
            B.add(B.sub(B.add(m(a1, d2), m(b1, c2)), m(c1, b2)), m(d1, a2)),
        )

    def inv(self, a):
        B = self.base
        norm = B.zero
        for x in a:
            norm = B.add(norm, self._m(x, x))
        n_inv = B.inv(norm)
        head, *tail = a
        return (self._m(head, n_inv),) + tuple(B.neg(self._m(x, n_inv)) for x in tail)

    def from_int(self, n):
        z = self.base.zero
        return (self.base.from_int(n), z, z, z)

    def encode(self, a):
        return [self.base.encode(x) for x in a]

    def decode(self, obj):
        if not isinstance(obj, list) or len(obj) != 4:
            raise FormatError(f"quaternion must be 4 base-field coordinates, got {obj!r}")
        return tuple(self.base.decode(x) for x in obj)


class _ComplexPairQuaternion(_Ring):
    """z + w*j over Q(zeta_m), with j*z = conj(z)*j and j^2 = -1."""

    commutative = False

    def __init__(self, base: _NumberField):
        self.base = base
        self.conj = base.power_map(base.cyclotomic_order - 1)
        z, o = base.zero, base.one
        self.zero, self.one = (z, z), (o, z)

    def add(self, a, b):
        return (self.base.add(a[0], b[0]), self.base.add(a[1], b[1]))

    def sub(self, a, b):
        return (self.base.sub(a[0], b[0]), self.base.sub(a[1], b[1]))

    def neg(self, a):
        return (self.base.neg(a[0]), self.base.neg(a[1]))

    def mul(self, a, b):
        B, conj = self.base, self.conj
        z1, w1 = a
        z2, w2 = b
        return (
            B.sub(B.mul(z1, z2), B.mul(w1, conj(w2))),
            B.add(B.mul(z1, w2), B.mul(w1, conj(z2))),
        )

    def inv(self, a):
        B = self.base
        z, w = a
        norm = B.add(B.mul(z, self.conj(z)), B.mul(w, self.conj(w)))
        n_inv = B.inv(norm)
        return (B.mul(self.conj(z), n_inv), B.neg(B.mul(w, n_inv)))

    def from_int(self, n):
        return (self.base.from_int(n), self.base.zero)

    def encode(self, a):
        return [self.base.encode(x) for x in a]

    def decode(self, obj):
        if not isinstance(obj, list) or len(obj) != 2:
            raise FormatError(f"Hc element must be a [z, w] pair, got {obj!r}")
        return tuple(self.base.decode(x) for x in obj)


class _CyclicAlgebra(_Ring):
    """Q(zeta_21)<b> with b*c = sigma(c)*b, sigma(zeta) = zeta^16, b^3 = zeta^7."""

    commutative = False

    def __init__(self, base: _NumberField):
        self.base = base
        m = base.cyclotomic_order
        # c*b^j = b^j * sigma^{-j}(c); sigma^{-1}: zeta -> zeta^4
        back = pow(LAM_TWIST, -1, m)
        self.twist = base.power_map(LAM_TWIST)
        self.untwist = (lambda c: c, base.power_map(back), base.power_map(back * back % m))
        self.cube = base.monomial(LAM_CUBE)
        z, o = base.zero, base.one
        self.zero, self.one = (z, z, z), (o, z, z)

    def add(self, a, b):
        return tuple(self.base.add(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(self.base.sub(x, y) for x, y in zip(a, b))

    def neg(self, a):
        return tuple(self.base.neg(x) for x in a)

    def left_matrix(self, a) -> List[List[Any]]:
        """M with (a*y)_r = sum_j M[r][j] * y_j over Q(zeta_21)."""
        B = self.base
        rows = []
        for r in range(3):
            row = []
            for j in range(3):
                i = (r - j) % 3
                entry = self.untwist[j](a[i])
                if i + j >= 3:
                    entry = B.mul(entry, self.cube)
                row.append(entry)
            rows.append(row)
        return rows

    def mul(self, a, b):
        B = self.base
        out = [B.zero, B.zero, B.zero]
        for r, row in enumerate(self.left_matrix(a)):
            acc = B.zero
            for entry, y in zip(row, b):
                if entry and y:
                    acc = B.add(acc, B.mul(entry, y))
            out[r] = acc
        return tuple(out)

    def inv(self, a):
        y = _solve_commutative(self.base, self.left_matrix(a), [self.base.one, self.base.zero, self.base.zero])
        if self.mul(a, y) != self.one or self.mul(y, a) != self.one:
            raise SingularSystem("cyclic-algebra inverse failed the two-sided check")
        return y

    def from_int(self, n):
        z = self.base.zero
        return (self.base.from_int(n), z, z)

    def encode(self, a):
        return [self.base.encode(x) for x in a]

    def decode(self, obj):
        if not isinstance(obj, list) or len(obj) != 3:
            raise FormatError(f"Lam36 element must be 3 Q(zeta:21) coordinates, got {obj!r}")
        return tuple(self.base.decode(x) for x in obj)


def _solve_commutative(ring: _Ring, matrix: List[List[Any]], rhs: List[Any]) -> tuple:
    """Gauss-Jordan for a square system over a commutative ring backend."""
    n = len(matrix)
    rows = [list(row) + [v] for row, v in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if not ring.is_zero(rows[r][col])), None)
        if pivot is None:
            raise SingularSystem("left-multiplication matrix is singular")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        p_inv = ring.inv(rows[col][col])
        rows[col] = [ring.mul(p_inv, v) for v in rows[col]]
        for r in range(n):
            if r != col and not ring.is_zero(rows[r][col]):
                f = rows[r][col]
                rows[r] = [ring.sub(v, ring.mul(f, w)) for v, w in zip(rows[r], rows[col])]
    return tuple(row[n] for row in rows)


# ---------- descriptors ----------
@dataclass(frozen=True)
class FieldDescriptor:
    name: str
    kind: FieldKind
    characteristic: int
    ring: _Ring = field(compare=False, repr=False, hash=False)
    base: Optional["FieldDescriptor"] = field(default=None, compare=False, repr=False, hash=False)

    @property
    def commutative(self) -> bool:
        return self.ring.commutative

    @property
    def is_finite(self) -> bool:
        return self.kind in (FieldKind.prime_field, FieldKind.finite_field)

    @property
    def order(self) -> Optional[int]:
        return self.ring.size

    def zero(self) -> "Scalar":
        return Scalar(self, self.ring.zero)

    def one(self) -> "Scalar":
        return Scalar(self, self.ring.one)

    def __call__(self, n: int) -> "Scalar":
        return Scalar(self, self.ring.from_int(n))


def characteristic(f: FieldDescriptor) -> int:
    return f.characteristic


def _render_poly(coeffs: Sequence[int]) -> str:
    deg = len(coeffs) - 1
    terms = []
    for k, c in enumerate(coeffs):
        e = deg - k
        if c == 0:
            continue
        mono = "" if e == 0 else ("x" if e == 1 else f"x^{e}")
        if e == 0:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}*{mono}")
    return "+".join(terms)


def _prime_power(q: int) -> Tuple[int, int]:
    f = factorint(q)
    if q < 2 or len(f) != 1:
        raise UnknownDescriptor(f"{q} is not a prime power")
    (p, s), = f.items()
    return p, s


def _first_irreducible(p: int, s: int) -> Tuple[int, ...]:
    for t in range(p ** s):
        lower = []
        for _ in range(s):
            t, r = divmod(t, p)
            lower.append(r)
        f = [1] + list(reversed(lower))
        if gf_irreducible_p(f, p, ZZ):
            return tuple(f)
    raise UnknownDescriptor(f"no irreducible polynomial of degree {s} over F_{p}")  # unreachable


def _parse_modulus(text: str, p: int, s: int) -> Tuple[int, ...]:
    try:
        expr = parse_expr(text.replace("^", "**"), local_dict={"x": _X})
        coeffs = [int(c) % p for c in Poly(expr, _X).all_coeffs()]
    except Exception as e:
        raise UnknownDescriptor(f"cannot parse modulus {text!r}: {e}") from e
    if len(coeffs) - 1 != s or coeffs[0] != 1:
        raise UnknownDescriptor(f"modulus {text!r} must be monic of degree {s}")
    if not gf_irreducible_p(coeffs, p, ZZ):
        raise UnknownDescriptor(f"modulus {text!r} is reducible over F_{p}")
    return tuple(coeffs)


def _number_field_poly(name: str) -> Tuple[List, Optional[int]]:
    m = re.fullmatch(r"Q\(sqrt(-?\d+)\)", name)
    if m:
        n = int(m.group(1))
        poly = Poly(_X ** 2 - n, _X)
        if not poly.is_irreducible:
            raise UnknownDescriptor(f"x^2-{n} is reducible; {name} is not a quadratic field")
        return [QQ(1), QQ(0), QQ(-n)], None
    m = re.fullmatch(r"Q\(zeta:(\d+)\)", name)
    if m:
        order = int(m.group(1))
        if order < 1:
            raise UnknownDescriptor(f"bad cyclotomic order in {name}")
        poly = cyclotomic_poly(order, _X, polys=True)
        return [QQ(int(c)) for c in poly.all_coeffs()], order
    raise UnknownDescriptor(f"unknown number field {name!r}")


@lru_cache(maxsize=None)
def descriptor(name: str) -> FieldDescriptor:
    """Resolve a preset name: Fp:5, Fq:9, Fq:9:x^2+1, Q, Q(sqrt2), Q(zeta:21), H:Q(sqrt5), Hc:Q(zeta:8), Lam36."""
    name = name.strip()
    if name.startswith("Fp:"):
        try:
            p = int(name[3:])
        except ValueError:
            raise UnknownDescriptor(f"bad prime in {name!r}") from None
        if not isprime(p):
            raise UnknownDescriptor(f"{p} is not prime")
        return FieldDescriptor(f"Fp:{p}", FieldKind.prime_field, p, _PrimeField(p))
    if name.startswith("Fq:"):
        head, _, modulus = name[3:].partition(":")
        try:
            q = int(head)
        except ValueError:
            raise UnknownDescriptor(f"bad field order in {name!r}") from None
        p, s = _prime_power(q)
        if s == 1:
            return descriptor(f"Fp:{p}")
        coeffs = _parse_modulus(modulus, p, s) if modulus else _first_irreducible(p, s)
        canonical = f"Fq:{q}:{_render_poly(coeffs)}"
        if canonical != name:
            return descriptor(canonical)
        log.debug("building F_%d tables for modulus %s", q, _render_poly(coeffs))
        return FieldDescriptor(canonical, FieldKind.finite_field, p, _GaloisField(p, s, coeffs))
    if name == "Q":
        return FieldDescriptor("Q", FieldKind.rationals, 0, _Rationals())
    if name == "Lam36":
        base = descriptor(f"Q(zeta:{LAM_ORDER})")
        return FieldDescriptor("Lam36", FieldKind.cyclic_algebra, 0, _CyclicAlgebra(base.ring), base)
    if name.startswith("Hc:"):
        base = descriptor(name[3:])
        if base.kind is not FieldKind.number_field or not base.ring.cyclotomic_order or base.ring.cyclotomic_order < 3:
            raise UnknownDescriptor(f"{name!r}: Hc needs a cyclotomic base Q(zeta:m), m >= 3")
        return FieldDescriptor(name, FieldKind.quaternion_cm, 0, _ComplexPairQuaternion(base.ring), base)
    if name.startswith("H:"):
        base = descriptor(name[2:])
        if base.kind not in (FieldKind.rationals, FieldKind.number_field) or base.name.startswith("Q(zeta"):
            raise UnknownDescriptor(f"{name!r}: H needs Q or a real quadratic base field")
        return FieldDescriptor(name, FieldKind.quaternion, 0, _Quaternion(base.ring), base)
    if name.startswith("Q("):
        poly, order = _number_field_poly(name)
        return FieldDescriptor(name, FieldKind.number_field, 0, _NumberField(poly, order))
    raise UnknownDescriptor(f"unknown descriptor {name!r}")


PRESETS = ("Fp:5", "Fq:9:x^2+1", "Q", "Q(sqrt2)", "Q(sqrt5)", "Q(zeta:21)",
           "H:Q", "H:Q(sqrt2)", "H:Q(sqrt5)", "Lam36")


# ---------- scalars ----------
@dataclass(frozen=True)
class Scalar:
    descriptor: FieldDescriptor
    payload: Any

    # -- plumbing --
    def _other(self, other) -> Any:
        if isinstance(other, Scalar):
            if other.descriptor is not self.descriptor and other.descriptor != self.descriptor:
                raise DescriptorMismatch(
                    f"cannot combine {self.descriptor.name} with {other.descriptor.name}")
            return other.payload
        if isinstance(other, int) and not isinstance(other, bool):
            return self.descriptor.ring.from_int(other)
        return NotImplemented

    def _wrap(self, payload) -> "Scalar":
        return Scalar(self.descriptor, payload)

    # -- field operations --
    def __add__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return self._wrap(self.descriptor.ring.add(self.payload, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return self._wrap(self.descriptor.ring.sub(self.payload, b))

    def __rsub__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return self._wrap(self.descriptor.ring.sub(b, self.payload))

    def __neg__(self):
        return self._wrap(self.descriptor.ring.neg(self.payload))

    def __mul__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        ring = self.descriptor.ring
        if ring.is_zero(self.payload) or ring.is_zero(b):
            return self._wrap(ring.zero)
        return self._wrap(ring.mul(self.payload, b))

    def __rmul__(self, other):
        # only integers land here; they are central
        return self.__mul__(other)

    def inv(self) -> "Scalar":
        ring = self.descriptor.ring
        if ring.is_zero(self.payload):
            raise DivisionByZero(f"zero has no inverse in {self.descriptor.name}")
        return self._wrap(ring.inv(self.payload))

    def __truediv__(self, other):
        """Right division x * y^-1."""
        b = self._other(other)
        if b is NotImplemented:
            return b
        return self * self._wrap(b).inv()

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        result, base = self.descriptor.one(), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_zero(self) -> bool:
        return self.descriptor.ring.is_zero(self.payload)

    def is_one(self) -> bool:
        return self.payload == self.descriptor.ring.one

    def encode(self):
        return self.descriptor.ring.encode(self.payload)

    def __repr__(self):
        return f"Scalar({self.descriptor.name}, {self.encode()!r})"


def decode(f: FieldDescriptor, obj) -> Scalar:
    return Scalar(f, f.ring.decode(obj))


def scalar(f: FieldDescriptor, value) -> Scalar:
    """Coerce an int or an already-typed Scalar into `f`."""
    if isinstance(value, Scalar):
        if value.descriptor != f:
            raise DescriptorMismatch(f"{value.descriptor.name} value where {f.name} expected")
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return f(value)
    return decode(f, value)


def rational(f: FieldDescriptor, num: int, den: int = 1) -> Scalar:
    """num/den in a characteristic-0 descriptor (embedded through its rational base)."""
    if f.characteristic != 0:
        return f(num) / f(den)
    base = f
    while base.base is not None:
        base = base.base
    value = Scalar(base, base.ring.from_int(num)) / Scalar(base, base.ring.from_int(den))
    return lift(f, value)


def lift(f: FieldDescriptor, x: Scalar) -> Scalar:
    """Embed an element of a base field of `f` (or of Q in a number field) into `f`."""
    if x.descriptor == f:
        return x
    if f.kind is FieldKind.number_field and x.descriptor.kind is FieldKind.rationals:
        return Scalar(f, tuple(dup_strip([x.payload])))
    if f.base is not None:
        inner = lift(f.base, x)
        z = f.base.ring.zero
        width = len(f.ring.zero)
        return Scalar(f, (inner.payload,) + (z,) * (width - 1))
    raise DescriptorMismatch(f"cannot embed {x.descriptor.name} into {f.name}")


def gen(f: FieldDescriptor) -> Scalar:
    """The class of x in Q[x]/(m) (sqrt(D) or zeta_m), or in F_p[x]/(m)."""
    if f.kind is FieldKind.number_field:
        return Scalar(f, f.ring.monomial(1))
    if f.kind is FieldKind.finite_field:
        return Scalar(f, f.ring.p)
    raise DescriptorMismatch(f"{f.name} has no polynomial generator")


def zeta(f: FieldDescriptor) -> Scalar:
    """zeta_m inside Q(zeta:m), Hc:Q(zeta:m) or Lam36."""
    if f.kind is FieldKind.number_field and f.ring.cyclotomic_order:
        return gen(f)
    if f.kind in (FieldKind.quaternion_cm, FieldKind.cyclic_algebra):
        return lift(f, gen(f.base))
    raise DescriptorMismatch(f"{f.name} has no distinguished root of unity")


def quaternion(f: FieldDescriptor, a=0, b=0, c=0, d=0) -> Scalar:
    if f.kind is not FieldKind.quaternion:
        raise DescriptorMismatch(f"{f.name} is not a quaternion algebra")
    return Scalar(f, tuple(scalar(f.base, v).payload for v in (a, b, c, d)))


def quaternion_units(f: FieldDescriptor) -> Tuple[Scalar, Scalar, Scalar]:
    """(i, j, k) of a Hamilton quaternion algebra."""
    if f.kind is FieldKind.quaternion:
        return quaternion(f, 0, 1), quaternion(f, 0, 0, 1), quaternion(f, 0, 0, 0, 1)
    raise DescriptorMismatch(f"{f.name} is not a Hamilton quaternion algebra")


def cm_quaternion(f: FieldDescriptor, z=0, w=0) -> Scalar:
    """z + w*j in Hc:Q(zeta:m)."""
    if f.kind is not FieldKind.quaternion_cm:
        raise DescriptorMismatch(f"{f.name} is not an Hc algebra")
    return Scalar(f, (scalar(f.base, z).payload, scalar(f.base, w).payload))


def lam_element(f: FieldDescriptor, c0=0, c1=0, c2=0) -> Scalar:
    """c0 + b*c1 + b^2*c2 in Lam36."""
    if f.kind is not FieldKind.cyclic_algebra:
        raise DescriptorMismatch(f"{f.name} is not the cyclic algebra")
    return Scalar(f, tuple(scalar(f.base, v).payload for v in (c0, c1, c2)))


def lam_b(f: FieldDescriptor) -> Scalar:
    return lam_element(f, 0, 1, 0)


def cyclic_algebra_mul(x: Scalar, y: Scalar) -> Scalar:
    if x.descriptor.kind is not FieldKind.cyclic_algebra:
        raise DescriptorMismatch(f"{x.descriptor.name} is not the cyclic algebra")
    return x * y


def cyclic_algebra_inv(x: Scalar) -> Scalar:
    if x.descriptor.kind is not FieldKind.cyclic_algebra:
        raise DescriptorMismatch(f"{x.descriptor.name} is not the cyclic algebra")
    return x.inv()


def twist(c: Scalar, times: int = 1) -> Scalar:
    """sigma^times on Q(zeta:21), sigma(zeta) = zeta^16."""
    f = c.descriptor
    if f.kind is not FieldKind.number_field or f.ring.cyclotomic_order != LAM_ORDER:
        raise DescriptorMismatch("the Lam36 twist acts on Q(zeta:21)")
    apply = f.ring.power_map(pow(LAM_TWIST, times % 3, LAM_ORDER))
    return Scalar(f, apply(c.payload))


def elements(f: FieldDescriptor) -> List[Scalar]:
    """All elements of a finite descriptor in payload order."""
    return [Scalar(f, a) for a in f.ring.elements()]


def multiplicative_order(x: Scalar, bound: int = 10_000) -> Optional[int]:
    """Smallest n >= 1 with x^n = 1, or None if none up to `bound`."""
    if x.is_zero():
        raise DivisionByZero("zero has no multiplicative order")
    y = x
    for n in range(1, bound + 1):
        if y.is_one():
            return n
        y = y * x
    return None


def sort_key(x: Scalar):
    """Deterministic total order on the payloads of one descriptor."""
    return _payload_key(x.payload)


def _payload_key(p):
    if isinstance(p, tuple):
        return (len(p),) + tuple(_payload_key(c) for c in p)
    if isinstance(p, int):
        return (p,)
    # QQ element
    return (int(QQ.numer(p)), int(QQ.denom(p)))


def all_vectors(f: FieldDescriptor, length: int) -> Iterator[Tuple[Scalar, ...]]:
    """Every vector of F_q^length in lexicographic payload order."""
    elems = elements(f)
    return itertools.product(elems, repeat=length)
