"""
Embeddings of TD(k, n) into P^d(D).

Canonical frames emitted by the constructions:
  additive (concurrent)   P1 = [g, 0, 1], P2 = [g, 1, 1], P3 = [-g, 1, 0], g in G <= D^{d-1};
                          hyperplanes x_d = 0, x_d = x_{d+1}, x_{d+1} = 0
  triangle                P1 = [0, c, 1, x], P2 = [c, 0, 1, x], P3 = [-1, c, 0, x], (c, x) in G;
                          hyperplanes x_1 = 0, x_2 = 0, x_3 = 0
Coordinates are 0-based in code: x_d is index d-1.
"""
from __future__ import annotations
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from sympy import factorint

from .audit import human_readable_explanation
from .design import LoopTable, TransversalDesign, elementary_abelian_prime, loop_operation, validate_td
from .errors import (
    CharZeroConcurrentImpossible,
    DimensionTooSmall,
    ExtensionUndefined,
    FormatError,
    GroupTooSmall,
    LineInHyperplane,
    NonStandardFrame,
    NotATransversalPoint,
    NotInCanonicalFrame,
    NothingToExtend,
    PartRejected,
    PointOnPartHyperplane,
    WrongClassification,
)
from .exactalg import FieldDescriptor, Scalar, decode, descriptor, elements, scalar, sort_key
from .groupcat import GeneratedGroup, require_certified
from .models import (
    ClassificationReport,
    Conclusion,
    EmbeddingPayload,
    FrameKind,
    GroupKind,
    GroupPayload,
    ImproperTransversalReport,
    PointPayload,
    VerificationReport,
    Violation,
    ViolationCode,
)
from .projgeom import (
    Flat,
    FrameChange,
    HomPoint,
    Hyperplane,
    coordinate_hyperplane,
    difference_hyperplane,
    hyperplane,
    incident,
    intersect_hyperplanes,
    line_through,
    normalize_at,
    point,
    span_flat,
    third_intersection,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddedTD:
    td: TransversalDesign
    points: Tuple[HomPoint, ...]              # indexed by TD point id
    part_hyperplanes: Tuple[Hyperplane, ...]  # one per part, same order as td.parts
    descriptor: FieldDescriptor
    d: int
    frame: FrameKind = FrameKind.external
    group: Optional[GeneratedGroup] = None
    infinity: Optional[HomPoint] = None
    _memo: Dict[str, object] = field(default_factory=dict, init=False, compare=False, repr=False, hash=False)

    def point_ids(self) -> Dict[HomPoint, int]:
        if "ids" not in self._memo:
            self._memo["ids"] = {p: i for i, p in enumerate(self.points)}
        return self._memo["ids"]

    def block_lines(self) -> List[Flat]:
        if "lines" not in self._memo:
            self._memo["lines"] = [span_flat([self.points[x] for x in b]) for b in self.td.blocks]
        return self._memo["lines"]

    def proper(self) -> bool:
        if "proper" not in self._memo:
            self._memo["proper"] = span_flat(self.points).dim == self.d
        return self._memo["proper"]

    def flat_dim(self) -> int:
        if "flat_dim" not in self._memo:
            self._memo["flat_dim"] = intersect_hyperplanes(self.part_hyperplanes).dim
        return self._memo["flat_dim"]


# ---------- frames ----------
def additive_hyperplanes(f: FieldDescriptor, d: int) -> Tuple[Hyperplane, Hyperplane, Hyperplane]:
    m = d - 1
    return (coordinate_hyperplane(f, d, m), difference_hyperplane(f, d, m, m + 1), coordinate_hyperplane(f, d, m + 1))


def triangle_hyperplanes(f: FieldDescriptor, d: int) -> Tuple[Hyperplane, Hyperplane, Hyperplane]:
    return tuple(coordinate_hyperplane(f, d, i) for i in range(3))


def frame_of(e: EmbeddedTD) -> FrameKind:
    """additive / multiplicative when the first three part hyperplanes are a canonical frame."""
    head = tuple(e.part_hyperplanes[:3])
    if head == additive_hyperplanes(e.descriptor, e.d):
        return FrameKind.additive
    if head == triangle_hyperplanes(e.descriptor, e.d):
        return FrameKind.multiplicative
    return FrameKind.external


# ---------- constructions ----------
def construct_additive(g: GeneratedGroup) -> EmbeddedTD:
    f = g.descriptor
    if f.characteristic == 0:
        raise CharZeroConcurrentImpossible(
            f"{f.name} has characteristic 0: three hyperplanes carrying a TD(3,n) cannot share a (d-2)-flat",
            witness={"descriptor": f.name})
    if g.kind is not GroupKind.additive:
        raise FormatError("construct_additive needs an additive group")
    cert = require_certified(g)
    n = g.order
    if n < 3:
        raise GroupTooSmall(f"|G| = {n} < 3")
    m = g.dim
    d = m + 1
    zero, one = f.zero(), f.one()
    pts = [HomPoint(tuple(c) + (zero, one)) for c in g.elements]
    pts += [HomPoint(tuple(c) + (one, one)) for c in g.elements]
    pts += [HomPoint(tuple(-x for x in c) + (one, zero)) for c in g.elements]
    # block (a, b) = {P1 a, P2 b, P3 a-b}
    blocks = [(a, n + b, 2 * n + cert.table[a][cert.inverses[b]]) for a in range(n) for b in range(n)]
    td = TransversalDesign.standard(3, n, blocks)
    log.debug("additive embedding of TD(3,%d) in P^%d(%s)", n, d, f.name)
    return EmbeddedTD(td, tuple(pts), additive_hyperplanes(f, d), f, d, FrameKind.additive, g)


def _construct_triangle(g: GeneratedGroup, d: int, frame: FrameKind) -> EmbeddedTD:
    f = g.descriptor
    cert = require_certified(g)
    n = g.order
    if n < 3:
        raise GroupTooSmall(f"|G| = {n} < 3")
    zero, one = f.zero(), f.one()
    if g.kind is GroupKind.multiplicative:
        pairs = [(c, (zero,) * (d - 2)) for c in g.elements]
    else:
        pairs = list(g.elements)
    pts = [point(f, zero, c, one, *x) for c, x in pairs]
    pts += [point(f, c, zero, one, *x) for c, x in pairs]
    pts += [point(f, -one, c, zero, *x) for c, x in pairs]
    # block (A, B) = {P1 AB, P2 B, P3 A}
    blocks = [(cert.table[a][b], n + b, 2 * n + a) for a in range(n) for b in range(n)]
    td = TransversalDesign.standard(3, n, blocks)
    log.debug("triangle embedding of TD(3,%d) in P^%d(%s)", n, d, f.name)
    return EmbeddedTD(td, tuple(pts), triangle_hyperplanes(f, d), f, d, frame, g)


def construct_multiplicative(g: GeneratedGroup, d: int = 2) -> EmbeddedTD:
    if g.kind is not GroupKind.multiplicative:
        raise FormatError("construct_multiplicative needs a multiplicative group")
    if d < 2:
        raise DimensionTooSmall(f"d = {d} < 2")
    return _construct_triangle(g, d, FrameKind.multiplicative)


def construct_semidirect(g: GeneratedGroup, d: Optional[int] = None) -> EmbeddedTD:
    if g.kind is not GroupKind.semidirect:
        raise FormatError("construct_semidirect needs a subgroup of D* x| D^(d-2)")
    d = g.dim + 2 if d is None else d
    if d != g.dim + 2:
        raise FormatError(f"translation parts have length {g.dim}, so d must be {g.dim + 2}")
    if d < 3:
        raise DimensionTooSmall(f"d = {d} < 3")
    return _construct_triangle(g, d, FrameKind.semidirect)


# ---------- verification ----------
def _fail(code: ViolationCode, detail: str, **witness) -> VerificationReport:
    return VerificationReport(ok=False, violation=Violation(code=code, detail=detail, witness=witness))


def _check_structure(e: EmbeddedTD) -> None:
    kn = e.td.k * e.td.n
    if len(e.points) != kn:
        raise FormatError(f"{len(e.points)} points for a TD with {kn} points")
    if len(e.part_hyperplanes) != e.td.k:
        raise FormatError(f"{len(e.part_hyperplanes)} hyperplanes for {e.td.k} parts")
    for p in e.points:
        if p.d != e.d or p.descriptor != e.descriptor:
            raise FormatError(f"point {p!r} is not in P^{e.d}({e.descriptor.name})")
    for h in e.part_hyperplanes:
        if h.d != e.d or h.descriptor != e.descriptor:
            raise FormatError(f"hyperplane {h!r} is not in P^{e.d}({e.descriptor.name})")


def verify_embedding(e: EmbeddedTD) -> VerificationReport:
    _check_structure(e)
    v = validate_td(e.td)
    if v is not None:
        return VerificationReport(ok=False, violation=v)
    seen: Dict[HomPoint, int] = {}
    for i, p in enumerate(e.points):
        if p in seen:
            return _fail(ViolationCode.not_injective, f"points {seen[p]} and {i} coincide", points=[seen[p], i], coords=p.encode())
        seen[p] = i
    lines = e.block_lines()
    for b, (block, line) in enumerate(zip(e.td.blocks, lines)):
        if line.dim > 1:
            return _fail(ViolationCode.block_not_collinear, f"block {b} spans a {line.dim}-flat", block=list(block))
    for p, part in enumerate(e.td.parts):
        h = e.part_hyperplanes[p]
        for x in part:
            if not incident(e.points[x], h):
                return _fail(ViolationCode.point_off_hyperplane, f"point {x} is off the hyperplane of part {p}",
                             point=x, part=p, coords=e.points[x].encode())
    if len(set(e.part_hyperplanes)) != len(e.part_hyperplanes):
        return _fail(ViolationCode.hyperplanes_not_distinct, "two parts share a hyperplane",
                     hyperplanes=[h.encode() for h in e.part_hyperplanes])
    first: Dict[Flat, int] = {}
    for b, line in enumerate(lines):
        if line in first:
            return _fail(ViolationCode.lines_not_distinct, f"blocks {first[line]} and {b} share a line", blocks=[first[line], b])
        first[line] = b
    for b, line in enumerate(lines):
        for p, h in enumerate(e.part_hyperplanes):
            if line.in_hyperplane(h):
                return _fail(ViolationCode.line_in_hyperplane, f"line of block {b} lies in the hyperplane of part {p}",
                             block=b, part=p)
    if e.infinity is not None:
        for p, h in enumerate(e.part_hyperplanes):
            if incident(e.infinity, h):
                return _fail(ViolationCode.infinity_on_hyperplane, f"the transversal point lies on part {p}",
                             part=p, infinity=e.infinity.encode())
        if e.td.T is None:
            return _fail(ViolationCode.transversal_not_concurrent, "a transversal point needs the partition T")
        for block in e.td.T:
            if not span_flat([e.points[x] for x in block]).contains(e.infinity):
                return _fail(ViolationCode.transversal_not_concurrent, f"line of T-block {list(block)} misses the transversal point",
                             block=list(block))
    return VerificationReport(ok=True, proper=e.proper(), flat_dim=e.flat_dim())


# ---------- coordinatization ----------
@dataclass(frozen=True)
class Coordinatization:
    group: GeneratedGroup
    frame: FrameKind
    base_points: Tuple[int, int]
    labels: Tuple[int, ...]          # P1 point id for each group element
    loop: LoopTable
    mapping: Optional[Tuple[int, ...]]  # loop element index -> group element index

    @property
    def isomorphic(self) -> bool:
        return self.mapping is not None


def _additive_shear(e: EmbeddedTD, one1: int, one2: int):
    """x' = x - delta z - (eps - delta) y moves the base points to [0,0,1] and [0,1,1]."""
    m = e.d - 1
    delta = normalize_at(e.points[one1], m + 1)[:m]
    eps = normalize_at(e.points[one2], m + 1)[:m]
    return delta, eps


def _default_base_points(e: EmbeddedTD, frame: FrameKind) -> Tuple[int, int]:
    f, d = e.descriptor, e.d
    ids = e.point_ids()
    zero, one = f.zero(), f.one()
    if frame is FrameKind.additive:
        o1 = HomPoint((zero,) * (d - 1) + (zero, one))
        o2 = HomPoint((zero,) * (d - 1) + (one, one))
        return (ids.get(o1, min(e.td.parts[0])), ids.get(o2, min(e.td.parts[1])))
    o1 = HomPoint((zero, one, one) + (zero,) * (d - 2))
    o2 = HomPoint((one, zero, one) + (zero,) * (d - 2))
    if o1 not in ids or o2 not in ids:
        raise NonStandardFrame("triangle frames need the base points [0,1,1,0] and [1,0,1,0] in the design")
    return ids[o1], ids[o2]


def extract_group(e: EmbeddedTD, one1: Optional[int] = None, one2: Optional[int] = None) -> Coordinatization:
    """Read G off the coordinates of the first part and match it against the geometric loop."""
    frame = frame_of(e)
    if frame is FrameKind.external:
        raise NonStandardFrame("part hyperplanes are not a canonical frame; apply a frame change first",
                               witness={"hyperplanes": [h.encode() for h in e.part_hyperplanes[:3]]})
    f, d = e.descriptor, e.d
    if one1 is None or one2 is None:
        b1, b2 = _default_base_points(e, frame)
        one1 = b1 if one1 is None else one1
        one2 = b2 if one2 is None else one2
    if one1 not in e.td.parts[0] or one2 not in e.td.parts[1]:
        raise FormatError("base points must lie in the first two parts")
    labels = tuple(sorted(e.td.parts[0]))
    if frame is FrameKind.additive:
        m = d - 1
        delta, eps = _additive_shear(e, one1, one2)
        elems = []
        for x in labels:
            c = normalize_at(e.points[x], m + 1)
            elems.append(tuple(g - dl for g, dl in zip(c[:m], delta)))
        g = GeneratedGroup.from_elements(GroupKind.additive, f, m, elems, "extracted")
    else:
        std = _default_base_points(e, frame)
        if (one1, one2) != std:
            raise NonStandardFrame("triangle frames read the group from the standard base points only",
                                   witness={"expected": list(std), "given": [one1, one2]})
        pairs = []
        for x in labels:
            c = normalize_at(e.points[x], 2)
            pairs.append((c[1], tuple(c[3:])))
        if d == 2 or all(v.is_zero() for _, x in pairs for v in x):
            g = GeneratedGroup.from_elements(GroupKind.multiplicative, f, 0, [c for c, _ in pairs], "extracted")
        else:
            g = GeneratedGroup.from_elements(GroupKind.semidirect, f, d - 2, pairs, "extracted")
    cert = require_certified(g)
    loop = loop_operation(e.td, one1, one2)
    # loop elements are sorted P1 ids, exactly `labels`, so element i of G labels loop element i
    n = g.order
    ok = all(cert.table[a][b] == loop.table[a][b] for a in range(n) for b in range(n))
    mapping = tuple(range(n)) if ok else None
    return Coordinatization(g, frame, (one1, one2), labels, loop, mapping)


# ---------- D_G and transversal points ----------
@dataclass(frozen=True)
class SubfieldDG:
    descriptor: FieldDescriptor
    elements: Tuple[Scalar, ...]

    @property
    def size(self) -> int:
        return len(self.elements)

    def is_subfield(self) -> bool:
        members = set(self.elements)
        f = self.descriptor
        if f.zero() not in members or f.one() not in members:
            return False
        for a in self.elements:
            if not a.is_zero() and a.inv() not in members:
                return False
            for b in self.elements:
                if a + b not in members or a * b not in members:
                    return False
        return True


def compute_DG(g: GeneratedGroup) -> SubfieldDG:
    """{a : G a <= G} by a scan of the whole finite field."""
    f = g.descriptor
    if g.kind is not GroupKind.additive or not f.is_finite:
        raise FormatError("D_G is computed for additive groups over a finite field")
    require_certified(g)
    members = set(g.elements)
    stab = [a for a in elements(f) if all(tuple(c * a for c in x) in members for x in g.elements)]
    return SubfieldDG(f, tuple(sorted(stab, key=sort_key)))


def _part_sets(e: EmbeddedTD) -> List[frozenset]:
    return [frozenset(p) for p in e.td.parts]


def transversal_blocks(e: EmbeddedTD, q: HomPoint) -> Optional[List[Tuple[int, ...]]]:
    """Blocks swept by the lines through q and the first part, when they partition V."""
    for p, h in enumerate(e.part_hyperplanes):
        if incident(q, h):
            raise PointOnPartHyperplane(f"{q!r} lies on the hyperplane of part {p}", witness={"part": p})
    ids = e.point_ids()
    parts = _part_sets(e)
    block_set = {tuple(sorted(b)) for b in e.td.blocks}
    covered: set = set()
    out = []
    for x in sorted(e.td.parts[0]):
        line = line_through(q, e.points[x])
        members = [x]
        for p in range(1, e.td.k):
            try:
                y = ids.get(third_intersection(line, e.part_hyperplanes[p]))
            except LineInHyperplane:
                return None
            if y is None or y not in parts[p]:
                return None
            members.append(y)
        key = tuple(sorted(members))
        if key not in block_set or covered.intersection(key):
            return None
        covered.update(key)
        out.append(key)
    return out if len(covered) == len(e.points) else None


def is_transversal_point(e: EmbeddedTD, q: HomPoint) -> bool:
    return transversal_blocks(e, q) is not None


def attach_transversal_point(e: EmbeddedTD, q: HomPoint) -> EmbeddedTD:
    """The Latin square with transversal: T is read off the lines through q."""
    blocks = transversal_blocks(e, q)
    if blocks is None:
        raise NotATransversalPoint(f"{q!r} is not a transversal point", witness={"point": q.encode()})
    return replace(e, td=e.td.with_T(blocks), infinity=q)


@dataclass(frozen=True)
class TransversalPointSet:
    group: GeneratedGroup
    dg: SubfieldDG
    points: Tuple[HomPoint, ...]

    description = "{[g, a, 1] : g in G, a in D_G \\ {0, 1}}"

    def contains(self, q: HomPoint) -> bool:
        c = q.coords
        if not c[-1].is_one():
            return False
        a = c[-2]
        return a in self.dg.elements and not a.is_zero() and not a.is_one() and tuple(c[:-2]) in set(self.group.elements)


def _require_additive_standard(e: EmbeddedTD) -> Coordinatization:
    if frame_of(e) is not FrameKind.additive:
        raise NonStandardFrame("expected the concurrent frame x_d = 0, x_d = x_{d+1}, x_{d+1} = 0")
    co = extract_group(e)
    ids = e.point_ids()
    f = e.descriptor
    o1 = HomPoint((f.zero(),) * (e.d - 1) + (f.zero(), f.one()))
    if ids.get(o1) != co.base_points[0]:
        raise NonStandardFrame("the first part does not contain [0, 0, 1]")
    return co


def transversal_points(e: EmbeddedTD) -> TransversalPointSet:
    if e.flat_dim() != e.d - 2:
        raise WrongClassification(f"part hyperplanes meet in a {e.flat_dim()}-flat, not a {e.d - 2}-flat",
                                  witness={"flat_dim": e.flat_dim(), "d": e.d})
    co = _require_additive_standard(e)
    dg = compute_DG(co.group)
    one = e.descriptor.one()
    pts = tuple(HomPoint(tuple(g) + (a, one)) for g in co.group.elements
                for a in dg.elements if not a.is_zero() and not a.is_one())
    return TransversalPointSet(co.group, dg, pts)


# ---------- extension by new parts ----------
def add_part(e: EmbeddedTD, a) -> EmbeddedTD:
    """New part on x_d = a x_{d+1}: the points [g, a, 1]; each block gains [al + (be - al) a, a, 1]."""
    f = e.descriptor
    a = scalar(f, a)
    co = _require_additive_standard(e)
    m = e.d - 1
    h_new = difference_hyperplane(f, e.d, m, m + 1, a)
    if h_new in e.part_hyperplanes:
        raise PartRejected(f"x_d = {a.encode()} x_(d+1) is already a part hyperplane",
                           witness={"a": a.encode()})
    k, n = e.td.k, e.td.n
    one = f.one()
    new_points = [HomPoint(tuple(g) + (a, one)) for g in co.group.elements]
    new_ids = {p: k * n + i for i, p in enumerate(new_points)}
    blocks = []
    for block in e.td.blocks:
        al = normalize_at(e.points[e.td.meet(block, 0)], m + 1)[:m]
        be = normalize_at(e.points[e.td.meet(block, 1)], m + 1)[:m]
        q = HomPoint(tuple(x + (y - x) * a for x, y in zip(al, be)) + (a, one))
        z = new_ids.get(q)
        blocks.append(tuple(block) + ((z,) if z is not None else ()))
    parts = e.td.parts + (tuple(range(k * n, (k + 1) * n)),)
    td = TransversalDesign(k + 1, n, parts, tuple(blocks))
    v = validate_td(td)
    if v is not None:
        raise PartRejected(f"adding x_d = {a.encode()} x_(d+1) breaks the design: {v.detail}",
                           witness=v.model_dump(mode="json"))
    return EmbeddedTD(td, e.points + tuple(new_points), e.part_hyperplanes + (h_new,), f, e.d, e.frame, e.group)


def extend_to_max_td(e: EmbeddedTD) -> EmbeddedTD:
    """Add x_d = a x_{d+1} for every a in D_G \\ {0, 1}, in D_G order: a TD(|D_G| + 1, n)."""
    co = _require_additive_standard(e)
    if not e.proper():
        raise ExtensionUndefined("the embedding lies in a hyperplane; extension is defined for proper embeddings only")
    dg = compute_DG(co.group)
    if dg.size == 2:
        raise NothingToExtend("D_G has two elements, so k <= 3", witness={"dg_size": 2})
    out = e
    for a in dg.elements:
        if a.is_zero() or a.is_one():
            continue
        if difference_hyperplane(e.descriptor, e.d, e.d - 1, e.d, a) in out.part_hyperplanes:
            continue
        out = add_part(out, a)
    log.info("extended TD(%d,%d) to TD(%d,%d)", e.td.k, e.td.n, out.td.k, out.td.n)
    return out


# ---------- the (d-3) case ----------
def check_improper_transversal(e: EmbeddedTD, infinity: HomPoint) -> ImproperTransversalReport:
    """In the triangle frame, a transversal point forces everything into x_1 + x_2 - x_3 = 0."""
    if e.flat_dim() != e.d - 3:
        raise WrongClassification(f"part hyperplanes meet in a {e.flat_dim()}-flat, not a {e.d - 3}-flat")
    if frame_of(e) is not FrameKind.multiplicative:
        raise NotInCanonicalFrame("expected the frame x_1 = 0, x_2 = 0, x_3 = 0")
    try:
        is_tp = is_transversal_point(e, infinity)
    except PointOnPartHyperplane:
        is_tp = False
    if e.d == 2:
        return ImproperTransversalReport(
            d=2, points_contained=False, infinity_contained=False, is_transversal_point=is_tp,
            verdict="impossible: a Latin square with transversal has no embedding on three nonconcurrent lines")
    f = e.descriptor
    h = hyperplane(f, 1, 1, -1, *([0] * (e.d - 2)))
    contained = all(incident(p, h) for p in e.points)
    inf_in = incident(infinity, h)
    if not is_tp:
        verdict = "not a transversal point"
    elif contained and inf_in:
        verdict = "contained: the design and its transversal point lie in x_1 + x_2 - x_3 = 0"
    else:
        verdict = "counterexample: a transversal point outside x_1 + x_2 - x_3 = 0"
    return ImproperTransversalReport(d=e.d, hyperplane=h.encode(), points_contained=contained,
                                     infinity_contained=inf_in, is_transversal_point=is_tp, verdict=verdict)


def orbit_candidates(e: EmbeddedTD) -> List[HomPoint]:
    """Points [1, a, b, x] off the triangle frame with a, b, x built from the group's coordinate values."""
    if frame_of(e) is not FrameKind.multiplicative:
        raise NotInCanonicalFrame("orbit candidates are defined in the triangle frame")
    f = e.descriptor
    values = {f.one(), -f.one()}
    shifts = {f.zero()}
    for x in e.td.parts[0]:
        c = normalize_at(e.points[x], 2)
        values.add(c[1])
        shifts.update(c[3:])
    values = sorted(values, key=sort_key)
    shifts = sorted(shifts, key=sort_key)
    out = []
    for a, b in itertools.product(values, repeat=2):
        for tail in itertools.product(shifts, repeat=e.d - 2):
            out.append(point(f, 1, a, b, *tail))
    return out


# ---------- frame changes ----------
def transform_embedding(e: EmbeddedTD, change: FrameChange) -> EmbeddedTD:
    pts = tuple(change.apply_point(p) for p in e.points)
    hs = tuple(change.apply_hyperplane(h) for h in e.part_hyperplanes)
    inf = None if e.infinity is None else change.apply_point(e.infinity)
    frame = e.frame if change.family == e.frame.value else FrameKind.external
    return EmbeddedTD(e.td, pts, hs, e.descriptor, e.d, frame, None, inf)


# ---------- classification ----------
def _prime_power_base(n: int) -> Optional[int]:
    f = factorint(n)
    return next(iter(f)) if len(f) == 1 else None


def classify(e: EmbeddedTD) -> ClassificationReport:
    f, d, n = e.descriptor, e.d, e.td.n
    char = f.characteristic
    flat_dim = e.flat_dim()
    proper = e.proper()
    loop = loop_operation(e.td)
    p_loop = elementary_abelian_prime(loop)
    conclusions: List[Conclusion] = []
    if flat_dim == d - 2:
        shape = "concurrent" if d == 2 else "d-2"
        conclusions.append(Conclusion(rule="concurrent_needs_char_p", holds=char > 0,
                                      detail=f"characteristic {char}"))
        p_n = _prime_power_base(n)
        conclusions.append(Conclusion(rule="order_is_power_of_char", holds=char > 0 and p_n == char,
                                      detail=f"n = {n} = " + " * ".join(f"{q}^{k}" for q, k in sorted(factorint(n).items()))))
        conclusions.append(Conclusion(rule="loop_elementary_abelian", holds=p_loop is not None and p_loop == char,
                                      detail="loop is an elementary abelian group" if p_loop else "loop is not elementary abelian"))
    elif flat_dim == d - 3:
        shape = "triangle" if d == 2 else "d-3"
        room = f.order is None or n <= f.order ** (d - 1)
        alternative = char > 0 and p_loop == char and room
        detail = ("the same TD also fits an additive frame, so this embedding cannot be proper"
                  if alternative else "no additive frame carries this TD")
        conclusions.append(Conclusion(rule="improper_when_additive_alternative", holds=not (alternative and proper),
                                      detail=detail))
    else:
        shape = f"{flat_dim}-flat"
    report = ClassificationReport(d=d, n=n, k=e.td.k, characteristic=char, flat_dim=flat_dim, shape=shape,
                                  proper=proper, loop_associative=loop.associative, loop_abelian=loop.abelian,
                                  loop_elementary_abelian=p_loop is not None, conclusions=conclusions)
    report.explanation = human_readable_explanation(report)
    return report


# ---------- JSON ----------
def to_payload(e: EmbeddedTD) -> EmbeddingPayload:
    return EmbeddingPayload(
        descriptor=e.descriptor.name, d=e.d, frame=e.frame, k=e.td.k, n=e.td.n,
        parts=[list(p) for p in e.td.parts],
        points=[PointPayload(id=i, coords=p.encode()) for i, p in enumerate(e.points)],
        part_hyperplanes=[h.encode() for h in e.part_hyperplanes],
        blocks=[list(b) for b in e.td.blocks],
        T=None if e.td.T is None else [list(b) for b in e.td.T],
        infinity=None if e.infinity is None else e.infinity.encode(),
        group=None if e.group is None else e.group.to_payload(),
    )


def from_payload(p: EmbeddingPayload) -> EmbeddedTD:
    f = descriptor(p.descriptor)
    ids = sorted(pt.id for pt in p.points)
    if ids != list(range(len(p.points))):
        raise FormatError("point ids must be 0..kn-1 without gaps")
    by_id = {pt.id: pt.coords for pt in p.points}

    def read_point(coords) -> HomPoint:
        if len(coords) != p.d + 1:
            raise FormatError(f"point {coords!r} needs {p.d + 1} coordinates")
        return point(f, *[decode(f, c) for c in coords])

    pts = tuple(read_point(by_id[i]) for i in range(len(ids)))
    hs = []
    for coeffs in p.part_hyperplanes:
        if len(coeffs) != p.d + 1:
            raise FormatError(f"hyperplane {coeffs!r} needs {p.d + 1} coefficients")
        hs.append(hyperplane(f, *[decode(f, c) for c in coeffs]))
    td = TransversalDesign(p.k, p.n, tuple(tuple(x) for x in p.parts), tuple(tuple(b) for b in p.blocks),
                           None if p.T is None else tuple(tuple(b) for b in p.T))
    group = None if p.group is None else GeneratedGroup.from_payload(GroupPayload.model_validate(p.group))
    inf = None if p.infinity is None else read_point(p.infinity)
    return EmbeddedTD(td, pts, tuple(hs), f, p.d, p.frame, group, inf)
