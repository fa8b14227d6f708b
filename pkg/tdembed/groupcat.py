"""
Finite groups inside a skew field D: additive subgroups of D^m, multiplicative subgroups
of D*, and subgroups of the semidirect product D* x| D^m with (a, x)(b, y) = (ab, xb + y).

Elements are plain values:
  additive        tuple of m Scalars
  multiplicative  Scalar
  semidirect      (Scalar, tuple of m Scalars)
"""
from __future__ import annotations
import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .config import SETTINGS
from .errors import (
    CharZeroNoFiniteAdditiveSubgroup,
    FormatError,
    GroupNotCertified,
    NotFinite,
    PresetNotConstructed,
    SearchSpaceTooLarge,
    UnknownPreset,
    UnsupportedSize,
)
from .exactalg import (
    FieldDescriptor,
    Scalar,
    cm_quaternion,
    decode,
    descriptor,
    elements as field_elements,
    lam_b,
    lam_element,
    multiplicative_order,
    quaternion,
    rational,
    scalar,
    zeta,
    gen,
)
from .models import GroupKind, GroupPayload, LemmaReport, Violation, ViolationCode
from .projgeom import matmul_vec, rank_and_solve

log = logging.getLogger(__name__)

Element = Any


# ---------- group laws ----------
def _vec_add(x, y):
    return tuple(a + b for a, b in zip(x, y))


def op(kind: GroupKind, a: Element, b: Element) -> Element:
    if kind is GroupKind.additive:
        return _vec_add(a, b)
    if kind is GroupKind.multiplicative:
        return a * b
    (al, x), (be, y) = a, b
    return (al * be, tuple(xi * be + yi for xi, yi in zip(x, y)))


def identity(kind: GroupKind, f: FieldDescriptor, dim: int) -> Element:
    zero = tuple(f.zero() for _ in range(dim))
    if kind is GroupKind.additive:
        return zero
    if kind is GroupKind.multiplicative:
        return f.one()
    return (f.one(), zero)


def inverse(kind: GroupKind, a: Element) -> Element:
    if kind is GroupKind.additive:
        return tuple(-c for c in a)
    if kind is GroupKind.multiplicative:
        return a.inv()
    al, x = a
    al_inv = al.inv()
    return (al_inv, tuple(-(c * al_inv) for c in x))


def encode_element(kind: GroupKind, a: Element):
    if kind is GroupKind.additive:
        return [c.encode() for c in a]
    if kind is GroupKind.multiplicative:
        return a.encode()
    return [a[0].encode(), [c.encode() for c in a[1]]]


def decode_element(kind: GroupKind, f: FieldDescriptor, dim: int, obj) -> Element:
    try:
        if kind is GroupKind.additive:
            if len(obj) != dim:
                raise FormatError(f"additive element needs {dim} coordinates, got {obj!r}")
            return tuple(decode(f, c) for c in obj)
        if kind is GroupKind.multiplicative:
            return decode(f, obj)
        gamma, x = obj
        if len(x) != dim:
            raise FormatError(f"translation part needs {dim} coordinates, got {x!r}")
        return (decode(f, gamma), tuple(decode(f, c) for c in x))
    except (TypeError, ValueError) as e:
        raise FormatError(f"cannot read group element {obj!r}: {e}") from e


# ---------- groups ----------
@dataclass(frozen=True)
class Certificate:
    order: int
    abelian: bool
    identity: int
    table: Tuple[Tuple[int, ...], ...]
    inverses: Tuple[int, ...]


@dataclass(frozen=True)
class GeneratedGroup:
    kind: GroupKind
    descriptor: FieldDescriptor
    dim: int
    elements: Tuple[Element, ...]
    name: Optional[str] = None
    _cert: Any = field(default=None, init=False, compare=False, repr=False, hash=False)

    @property
    def order(self) -> int:
        return len(self.elements)

    def op(self, a: Element, b: Element) -> Element:
        return op(self.kind, a, b)

    def identity(self) -> Element:
        return identity(self.kind, self.descriptor, self.dim)

    def inverse(self, a: Element) -> Element:
        return inverse(self.kind, a)

    def index(self) -> Dict[Element, int]:
        return {e: i for i, e in enumerate(self.elements)}

    @classmethod
    def from_elements(cls, kind: GroupKind, f: FieldDescriptor, dim: int,
                      elements: Iterable[Element], name: Optional[str] = None) -> "GeneratedGroup":
        return cls(GroupKind(kind), f, dim, tuple(elements), name)

    @classmethod
    def generate(cls, kind: GroupKind, f: FieldDescriptor, dim: int, generators: Sequence[Element],
                 name: Optional[str] = None, bound: Optional[int] = None) -> "GeneratedGroup":
        """Closure of `generators` under right multiplication, identity first (BFS order)."""
        kind = GroupKind(kind)
        bound = SETTINGS.closure_bound if bound is None else bound
        e = identity(kind, f, dim)
        elems = [e]
        seen = {e}
        frontier = [e]
        while frontier:
            new = []
            for x in frontier:
                for g in generators:
                    y = op(kind, x, g)
                    if y not in seen:
                        seen.add(y)
                        elems.append(y)
                        new.append(y)
                        if len(elems) > bound:
                            raise NotFinite(f"closure exceeds {bound} elements",
                                            witness={"bound": bound, "generators": [encode_element(kind, g) for g in generators]})
            frontier = new
        return cls(kind, f, dim, tuple(elems), name)

    def to_payload(self) -> GroupPayload:
        return GroupPayload(kind=self.kind, descriptor=self.descriptor.name, dim=self.dim, name=self.name,
                            elements=[encode_element(self.kind, a) for a in self.elements])

    @classmethod
    def from_payload(cls, p: GroupPayload) -> "GeneratedGroup":
        f = descriptor(p.descriptor)
        return cls(p.kind, f, p.dim, tuple(decode_element(p.kind, f, p.dim, a) for a in p.elements), p.name)


def certify(g: GeneratedGroup) -> Union[Certificate, Violation]:
    """Closure over all n^2 products, identity, inverses; n^2 table recorded."""
    if g._cert is not None:
        return g._cert
    if not g.elements:
        return Violation(code=ViolationCode.identity_missing, detail="empty element list")
    log.info("certifying %s of order %d", g.name or g.kind.value, g.order)
    index: Dict[Element, int] = {}
    for i, a in enumerate(g.elements):
        if g.kind is GroupKind.multiplicative and a.is_zero():
            return Violation(code=ViolationCode.closure, detail="0 is not a unit", witness={"element": i})
        if g.kind is GroupKind.semidirect and a[0].is_zero():
            return Violation(code=ViolationCode.closure, detail="zero multiplicative part", witness={"element": i})
        if a in index:
            return Violation(code=ViolationCode.duplicate_element, detail=f"element {i} repeats element {index[a]}",
                             witness={"first": index[a], "second": i})
        index[a] = i
    e = g.identity()
    if e not in index:
        return Violation(code=ViolationCode.identity_missing, detail="identity not listed")
    table = []
    for i, a in enumerate(g.elements):
        row = []
        for j, b in enumerate(g.elements):
            c = g.op(a, b)
            k = index.get(c)
            if k is None:
                return Violation(code=ViolationCode.closure, detail=f"product of elements {i} and {j} is not listed",
                                 witness={"left": i, "right": j, "product": encode_element(g.kind, c)})
            row.append(k)
        table.append(tuple(row))
    ident = index[e]
    inverses = []
    for i, row in enumerate(table):
        j = next((j for j, k in enumerate(row) if k == ident), None)
        if j is None:
            return Violation(code=ViolationCode.inverse_missing, detail=f"element {i} has no inverse", witness={"element": i})
        inverses.append(j)
    n = g.order
    abelian = all(table[a][b] == table[b][a] for a in range(n) for b in range(a + 1, n))
    cert = Certificate(n, abelian, ident, tuple(table), tuple(inverses))
    object.__setattr__(g, "_cert", cert)
    return cert


def require_certified(g: GeneratedGroup) -> Certificate:
    cert = certify(g)
    if isinstance(cert, Violation):
        raise GroupNotCertified(cert.detail, witness=cert.model_dump(mode="json"))
    return cert


# ---------- constructors ----------
def additive_group(f: FieldDescriptor, dim: int, generators: Sequence[Sequence], name: Optional[str] = None,
                   bound: Optional[int] = None) -> GeneratedGroup:
    """F_p-span of the generator vectors in D^dim."""
    gens = []
    for v in generators:
        if len(v) != dim:
            raise FormatError(f"generator {v!r} does not have {dim} coordinates")
        gens.append(tuple(scalar(f, c) for c in v))
    if f.characteristic == 0 and any(not c.is_zero() for v in gens for c in v):
        raise CharZeroNoFiniteAdditiveSubgroup(
            f"{f.name} has characteristic 0: every nonzero vector has infinite additive order",
            witness={"descriptor": f.name})
    g = GeneratedGroup.generate(GroupKind.additive, f, dim, gens, name, bound)
    require_certified(g)
    return g


def multiplicative_group(f: FieldDescriptor, generators: Sequence, name: Optional[str] = None,
                         bound: Optional[int] = None) -> GeneratedGroup:
    gens = [scalar(f, c) for c in generators]
    g = GeneratedGroup.generate(GroupKind.multiplicative, f, 0, gens, name, bound)
    require_certified(g)
    return g


def semidirect_group(f: FieldDescriptor, generators: Sequence[Tuple[Any, Sequence]], dim: int,
                     name: Optional[str] = None, bound: Optional[int] = None) -> GeneratedGroup:
    gens = []
    for gamma, x in generators:
        gamma = scalar(f, gamma)
        if gamma.is_zero():
            raise FormatError("semidirect generators need a nonzero multiplicative part")
        if len(x) != dim:
            raise FormatError(f"translation part {x!r} does not have {dim} coordinates")
        gens.append((gamma, tuple(scalar(f, c) for c in x)))
    g = GeneratedGroup.generate(GroupKind.semidirect, f, dim, gens, name, bound)
    require_certified(g)
    return g


def semidirect_cyclic(gamma: Scalar, x: Sequence, bound: Optional[int] = None) -> GeneratedGroup:
    """<(gamma, x)>."""
    return semidirect_group(gamma.descriptor, [(gamma, x)], len(x), bound=bound)


def _quaternion_set(f: FieldDescriptor, coords: Iterable[Tuple]) -> List[Scalar]:
    return [quaternion(f, *c) for c in coords]


def _tstar_coords(f: FieldDescriptor) -> List[Tuple]:
    one, half = f.base.one(), rational(f.base, 1, 2)
    out = []
    for pos in range(4):
        for s in (1, -1):
            c = [f.base.zero()] * 4
            c[pos] = one * s
            out.append(tuple(c))
    for signs in itertools.product((1, -1), repeat=4):
        out.append(tuple(half * s for s in signs))
    return out


def _even_permutations(n: int) -> List[Tuple[int, ...]]:
    def parity(p):
        return sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j]) % 2

    return [p for p in itertools.permutations(range(n)) if parity(p) == 0]


def _build_preset(name: str) -> GeneratedGroup:
    if name.startswith("cyclic:"):
        n = _int_param(name)
        if n < 1:
            raise UnknownPreset(f"cyclic order must be >= 1 in {name!r}")
        f = descriptor(f"Q(zeta:{n})")
        return multiplicative_group(f, [gen(f)], name)
    if name == "Q8":
        f = descriptor("H:Q")
        return multiplicative_group(f, [quaternion(f, 0, 1), quaternion(f, 0, 0, 1)], name)
    if name.startswith("Dstar:"):
        n = _int_param(name)
        if n < 2:
            raise UnknownPreset(f"binary dihedral groups need n >= 2, got {name!r}")
        if n > 12:
            raise UnsupportedSize(f"binary dihedral presets are shipped for n <= 12, got {n}")
        f = descriptor(f"Hc:Q(zeta:{2 * n})")
        return multiplicative_group(f, [zeta(f), cm_quaternion(f, 0, 1)], name)
    if name == "Tstar":
        f = descriptor("H:Q")
        g = GeneratedGroup.from_elements(GroupKind.multiplicative, f, 0, _quaternion_set(f, _tstar_coords(f)), name)
        require_certified(g)
        return g
    if name == "Ostar":
        f = descriptor("H:Q(sqrt2)")
        r = gen(f.base) * rational(f.base, 1, 2)     # 1/sqrt2 = sqrt2/2
        coords = _tstar_coords(f)
        for a, b in itertools.combinations(range(4), 2):
            for sa, sb in itertools.product((1, -1), repeat=2):
                c = [f.base.zero()] * 4
                c[a], c[b] = r * sa, r * sb
                coords.append(tuple(c))
        g = GeneratedGroup.from_elements(GroupKind.multiplicative, f, 0, _quaternion_set(f, coords), name)
        require_certified(g)
        return g
    if name == "Istar":
        f = descriptor("H:Q(sqrt5)")
        base = f.base
        half = rational(base, 1, 2)
        phi = (base.one() + gen(base)) * half
        values = (base.zero(), half, (phi - 1) * half, phi * half)
        coords = _tstar_coords(f)
        for perm in _even_permutations(4):
            for s1, s2, s3 in itertools.product((1, -1), repeat=3):
                signed = (values[0], values[1] * s1, values[2] * s2, values[3] * s3)
                c = [base.zero()] * 4
                for t in range(4):
                    c[perm[t]] = signed[t]
                coords.append(tuple(c))
        g = GeneratedGroup.from_elements(GroupKind.multiplicative, f, 0, _quaternion_set(f, coords), name)
        require_certified(g)
        return g
    if name == "G792":
        f = descriptor("Lam36")
        a = lam_element(f, gen(f.base) ** 3)
        return multiplicative_group(f, [a, lam_b(f)], name)
    if name in NAME_ONLY:
        raise PresetNotConstructed(f"{name} ({NAME_ONLY[name]}) is catalogued by name only")
    raise UnknownPreset(f"unknown group preset {name!r}")


def _int_param(name: str) -> int:
    try:
        return int(name.split(":", 1)[1])
    except ValueError:
        raise UnknownPreset(f"bad parameter in {name!r}") from None


NAME_ONLY = {
    "TstarxG": "T* x G_{m,n,r}",
    "G13_9_9": "G_{13,9,9}, order 117",
}


def catalog_names() -> List[str]:
    return ["cyclic:n", "Q8", "Dstar:n", "Tstar", "Ostar", "Istar", "G792"] + sorted(NAME_ONLY)


@lru_cache(maxsize=64)
def catalog(name: str) -> GeneratedGroup:
    """A certified preset group; results are immutable and cached."""
    return _build_preset(name.strip())


# ---------- structure ----------
def element_order(g: GeneratedGroup, i: int) -> int:
    cert = require_certified(g)
    k, x = 1, i
    while x != cert.identity:
        x = cert.table[x][i]
        k += 1
    return k


def find_cyclic_generator(g: GeneratedGroup) -> Optional[Element]:
    """An element of order |G|, or None if G is not cyclic."""
    require_certified(g)
    for i, a in enumerate(g.elements):
        if element_order(g, i) == g.order:
            return a
    return None


def no_element_of_order_p(f: FieldDescriptor) -> Optional[Scalar]:
    """Scan F_q* for an element of multiplicative order p; None means none exists."""
    p = f.characteristic
    if p == 0:
        raise FormatError(f"{f.name} has characteristic 0")
    for x in field_elements(f):
        if not x.is_zero() and multiplicative_order(x, bound=p) == p:
            return x
    return None


def _shift_candidates(g: GeneratedGroup) -> List[Scalar]:
    f = g.descriptor
    if f.is_finite:
        return [x for x in field_elements(f) if not x.is_zero()]
    sample = [f(1), f(-1), f(2), rational(f, 1, 2)]
    sample += [a for a in g.elements if not a.is_one()][:2]
    return sample


def shift_rigidity_witnesses(g: GeneratedGroup) -> List[Tuple[Scalar, Scalar]]:
    """Pairs (a, b), a != 0, with G + a = G b."""
    found = []
    for a in _shift_candidates(g):
        shifted = [x + a for x in g.elements]
        members = set(shifted)
        # 1 is in G, so b itself lies in G + a
        for b in shifted:
            if not b.is_zero() and all((h * b) in members for h in g.elements):
                found.append((a, b))
                break
    return found


def lemma_checks(g: GeneratedGroup) -> LemmaReport:
    if g.kind is not GroupKind.multiplicative:
        raise FormatError("lemma checks apply to multiplicative groups")
    require_certified(g)
    f = g.descriptor
    n = g.order
    total = f.zero()
    for x in g.elements:
        total = total + x
    if n == 1:
        sum_zero = "exempt (|G|=1)"
    else:
        sum_zero = "ok" if total.is_zero() else "fail"
    order_nonzero = not f(n).is_zero()
    if f.characteristic == 0:
        no_order_p = "exempt (characteristic 0)"
    else:
        p = f.characteristic
        bad = [x for x in g.elements if multiplicative_order(x, bound=p) == p]
        no_order_p = "fail" if bad else "ok"
    if n == 1:
        shift_rigid, witnesses = "exempt (|G|=1)", []
    else:
        witnesses = shift_rigidity_witnesses(g)
        shift_rigid = "fail" if witnesses else "ok"
    return LemmaReport(order=n, sum_zero=sum_zero, order_nonzero=order_nonzero, no_order_p=no_order_p,
                       shift_rigid=shift_rigid,
                       shift_witnesses=[[a.encode(), b.encode()] for a, b in witnesses])


# ---------- equivalence over finite fields ----------
def _general_linear(f: FieldDescriptor, m: int) -> Iterable[Tuple[Tuple[Scalar, ...], ...]]:
    elems = field_elements(f)
    for entries in itertools.product(elems, repeat=m * m):
        rows = tuple(tuple(entries[i * m:(i + 1) * m]) for i in range(m))
        if m == 0 or rank_and_solve(rows)[0] == m:
            yield rows


def _encode_matrix(T) -> list:
    return [[c.encode() for c in row] for row in T]


def group_equivalence(g1: GeneratedGroup, g2: GeneratedGroup, mode: GroupKind,
                      bound: Optional[int] = None) -> Optional[Dict[str, Any]]:
    """
    Exhaustive search for
      additive:        G1 = T G2 a
      multiplicative:  G1 = a^-1 G2 a
      semidirect:      G1 = (a, v) phi_T(G2) (a, v)^-1, phi_T(c, x) = (c, T x)
    Returns the witness, or None after exhausting the search space.
    """
    mode = GroupKind(mode)
    bound = SETTINGS.search_bound if bound is None else bound
    f = g1.descriptor
    if g2.descriptor != f or not f.is_finite:
        raise FormatError("equivalence search needs two groups over one finite field")
    if g1.kind is not mode or g2.kind is not mode or g1.dim != g2.dim:
        raise FormatError("groups do not match the requested mode")
    if g1.order != g2.order:
        return None
    q, m = f.order, g1.dim
    target = set(g1.elements)
    units = [x for x in field_elements(f) if not x.is_zero()]
    if mode is GroupKind.multiplicative:
        space = q - 1
    elif mode is GroupKind.additive:
        space = q ** (m * m) * (q - 1)
    else:
        space = q ** (m * m) * (q - 1) * q ** m
    if space > bound:
        raise SearchSpaceTooLarge(f"equivalence search space {space} exceeds {bound}",
                                  witness={"space": space, "bound": bound})
    log.info("equivalence search (%s) over %d candidates", mode.value, space)
    if mode is GroupKind.multiplicative:
        for a in units:
            a_inv = a.inv()
            if {a_inv * x * a for x in g2.elements} == target:
                return {"a": a.encode()}
        return None
    if mode is GroupKind.additive:
        for T in _general_linear(f, m):
            images = [tuple(matmul_vec(T, x)) for x in g2.elements]
            for a in units:
                if {tuple(c * a for c in y) for y in images} == target:
                    return {"T": _encode_matrix(T), "a": a.encode()}
        return None
    for T in _general_linear(f, m):
        twisted = [(c, tuple(matmul_vec(T, x)) if m else ()) for c, x in g2.elements]
        for a in units:
            for v in itertools.product(field_elements(f), repeat=m):
                av = (a, tuple(v))
                av_inv = inverse(GroupKind.semidirect, av)
                image = {op(GroupKind.semidirect, op(GroupKind.semidirect, av, y), av_inv) for y in twisted}
                if image == target:
                    return {"T": _encode_matrix(T), "a": a.encode(), "v": [c.encode() for c in v]}
    return None

