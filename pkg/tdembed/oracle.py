"""
Brute-force ground truth over small PG(d, q).

Everything here is exhaustive. The closed-form answers in `embedding` are tested
against it.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations, product
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import isprime

from .config import SETTINGS
from .design import TransversalDesign, elementary_abelian_prime, is_cyclic, loop_operation
from .embedding import EmbeddedTD, additive_hyperplanes, is_transversal_point, triangle_hyperplanes, verify_embedding
from .errors import SearchSpaceTooLarge, SideTooSmall, UnsupportedSize
from .exactalg import FieldDescriptor, Scalar, descriptor, elements
from .models import ConfigurationReport, FrameKind, FrameShape, PGSpaceReport, SearchReport
from .projgeom import HomPoint, Hyperplane, all_points, hyperplane, incident, line_through, normalize_at, point, third_intersection

log = logging.getLogger(__name__)

SUPPORTED_Q = (2, 3, 4, 5, 7, 8, 9)
SUPPORTED_D = (2, 3)


def field_for(q: int) -> FieldDescriptor:
    return descriptor(f"Fp:{q}" if isprime(q) else f"Fq:{q}")


def _check_size(q: Optional[int], d: int) -> None:
    if q not in SUPPORTED_Q or d not in SUPPORTED_D:
        raise UnsupportedSize(f"PG({d},{q}) is outside the exhaustive range q in {SUPPORTED_Q}, d in {SUPPORTED_D}",
                              witness={"q": q, "d": d})


# ---------- PG(d, q) ----------
@dataclass(frozen=True)
class PGSpace:
    q: int
    d: int
    descriptor: FieldDescriptor
    points: Tuple[HomPoint, ...]

    @classmethod
    def enumerate(cls, q: int, d: int) -> "PGSpace":
        _check_size(q, d)
        return _space(field_for(q), d)

    @classmethod
    def over(cls, f: FieldDescriptor, d: int) -> "PGSpace":
        """PG(d, q) built on a given finite descriptor (keeps its modulus)."""
        _check_size(f.order, d)
        return _space(f, d)

    @cached_property
    def index(self) -> Dict[HomPoint, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def hyperplanes(self) -> Tuple[Hyperplane, ...]:
        # duality: the coefficient vectors are the point coordinates themselves
        return tuple(hyperplane(self.descriptor, *p.coords) for p in self.points)

    @cached_property
    def incidence(self) -> Tuple[int, ...]:
        """Bitmask of the points on each hyperplane."""
        log.info("building incidence of PG(%d,%d)", self.d, self.q)
        masks = []
        for h in self.hyperplanes:
            mask = 0
            for i, p in enumerate(self.points):
                if incident(p, h):
                    mask |= 1 << i
            masks.append(mask)
        return tuple(masks)

    def points_on(self, h: Hyperplane) -> List[HomPoint]:
        return [p for p in self.points if incident(p, h)]

    def report(self) -> PGSpaceReport:
        per_h = sorted({bin(m).count("1") for m in self.incidence})
        per_p = sorted({sum(1 for m in self.incidence if m >> i & 1) for i in range(len(self.points))})
        return PGSpaceReport(q=self.q, d=self.d, descriptor=self.descriptor.name, points=len(self.points),
                             hyperplanes=len(self.hyperplanes), points_per_hyperplane=per_h, hyperplanes_per_point=per_p)


@lru_cache(maxsize=16)
def _space(f: FieldDescriptor, d: int) -> PGSpace:
    log.info("enumerating PG(%d,%d) over %s", d, f.order, f.name)
    return PGSpace(f.order, d, f, tuple(all_points(f, d)))


# ---------- transversal points ----------
def brute_transversal_points(e: EmbeddedTD) -> List[HomPoint]:
    """Every point of PG(d, q) off the part hyperplanes that sweeps a transversal, in space order."""
    if not e.descriptor.is_finite:
        raise UnsupportedSize(f"{e.descriptor.name} is infinite; no exhaustive scan")
    space = PGSpace.over(e.descriptor, e.d)
    out = []
    for p in space.points:
        if any(incident(p, h) for h in e.part_hyperplanes):
            continue
        if is_transversal_point(e, p):
            out.append(p)
    log.debug("brute force found %d transversal points among %d", len(out), len(space.points))
    return out


# ---------- TD(3, n) on a fixed frame ----------
def frame_lines(f: FieldDescriptor, frame: FrameShape) -> Tuple[Hyperplane, Hyperplane, Hyperplane]:
    """concurrent: y = 0, y = z, z = 0 through [1, 0, 0]; triangle: x = 0, y = 0, z = 0."""
    if FrameShape(frame) is FrameShape.concurrent:
        return additive_hyperplanes(f, 2)
    return triangle_hyperplanes(f, 2)


def _scalings(f: FieldDescriptor, frame: FrameShape) -> List[Tuple[Scalar, Scalar, Scalar]]:
    units = [x for x in elements(f) if not x.is_zero()]
    one = f.one()
    if frame is FrameShape.concurrent:
        return [(s, one, one) for s in units]
    return [(s, t, one) for s, t in product(units, units)]


def _scale(p: HomPoint, s: Sequence[Scalar]) -> HomPoint:
    return point(p.descriptor, *[c * x for c, x in zip(p.coords, s)])


def _is_coset_family(values: Sequence[Sequence[Scalar]], additive: bool) -> bool:
    """True when the three value sets are cosets of one subgroup of (F, +) or (F*, .)."""
    subgroups = []
    for vals in values:
        base = vals[0]
        if additive:
            sub = frozenset(v - base for v in vals)
            closed = all(a + b in sub for a in sub for b in sub)
        else:
            inv = base.inv()
            sub = frozenset(v * inv for v in vals)
            closed = all(a * b in sub for a in sub for b in sub)
        if not closed:
            return False
        subgroups.append(sub)
    return all(s == subgroups[0] for s in subgroups)


def _coordinates(frame: FrameShape, parts: Sequence[Sequence[HomPoint]]) -> List[List[Scalar]]:
    if frame is FrameShape.concurrent:
        # [x, 0, 1], [x, 1, 1], [x, 1, 0]
        return [[normalize_at(p, 2)[0] for p in parts[0]],
                [normalize_at(p, 2)[0] for p in parts[1]],
                [normalize_at(p, 1)[0] for p in parts[2]]]
    # [0, c, 1], [c, 0, 1], [1, c, 0]
    return [[normalize_at(p, 2)[1] for p in parts[0]],
            [normalize_at(p, 2)[0] for p in parts[1]],
            [normalize_at(p, 0)[1] for p in parts[2]]]


def _third_part(s1, s2, h3: Hyperplane, allowed: frozenset) -> Optional[List[List[HomPoint]]]:
    rows = []
    for a in s1:
        row = []
        for b in s2:
            c = third_intersection(line_through(a, b), h3)
            if c not in allowed:
                return None
            row.append(c)
        rows.append(row)
    return rows


def search_td_on_frame(space: PGSpace, frame: FrameShape, n: int) -> SearchReport:
    """
    All TD(3, n) whose parts sit on the three frame lines, grouped under diagonal scalings.

    Only points on exactly one frame line can carry the design: q points per line for the
    concurrent frame, q - 1 for the triangle. When a line has fewer than n of them the
    report comes back `vacuous` with no candidates; nothing was searched.
    """
    frame = FrameShape(frame)
    if space.d != 2:
        raise UnsupportedSize("frame searches run in the plane only", witness={"d": space.d})
    if n < 3:
        raise SideTooSmall(f"n = {n} < 3")
    f = space.descriptor
    lines = frame_lines(f, frame)
    # design points sit on exactly one frame line
    on = [[p for p in space.points_on(h) if sum(incident(p, g) for g in lines) == 1] for h in lines]
    usable = [len(o) for o in on]
    if min(usable) < n:
        log.info("vacuous: the %s frame of PG(2,%d) has %s usable points per line, fewer than n = %d",
                 frame.value, space.q, usable, n)
        return SearchReport(q=space.q, d=space.d, frame=frame, n=n, candidates=0, found=0,
                            usable_per_line=usable, vacuous=True)
    candidates = comb(len(on[0]), n) * comb(len(on[1]), n)
    if candidates > SETTINGS.search_bound:
        raise SearchSpaceTooLarge(f"{candidates} candidate pairs exceed the bound {SETTINGS.search_bound}",
                                  witness={"candidates": candidates, "bound": SETTINGS.search_bound})
    log.info("searching %d candidate pairs for TD(3,%d) on the %s frame of PG(2,%d)", candidates, n, frame.value, space.q)
    allowed = frozenset(on[2])
    scalings = _scalings(f, frame)
    idx = space.index
    classes: Dict[Tuple, List] = {}
    found = 0
    for s1, s2 in product(combinations(on[0], n), combinations(on[1], n)):
        rows = _third_part(s1, s2, lines[2], allowed)
        if rows is None:
            continue
        s3 = sorted({c for row in rows for c in row}, key=idx.__getitem__)
        if len(s3) != n:
            continue
        pos3 = {c: i for i, c in enumerate(s3)}
        blocks = [(i, n + j, 2 * n + pos3[rows[i][j]]) for i in range(n) for j in range(n)]
        td = TransversalDesign.standard(3, n, blocks)
        e = EmbeddedTD(td, tuple(s1) + tuple(s2) + tuple(s3), lines, f, 2, FrameKind.external)
        if not verify_embedding(e).ok:
            continue
        found += 1
        key = min(
            (tuple(sorted(idx[_scale(p, s)] for p in s1)), tuple(sorted(idx[_scale(p, s)] for p in s2)))
            for s in scalings
        )
        if key in classes:
            classes[key][1] += 1
            continue
        loop = loop_operation(td)
        parts = (list(s1), list(s2), s3)
        coset = _is_coset_family(_coordinates(frame, parts), additive=frame is FrameShape.concurrent)
        report = ConfigurationReport(
            parts=[[p.encode() for p in part] for part in parts], class_size=0,
            associative=loop.associative, abelian=loop.abelian,
            elementary_abelian=elementary_abelian_prime(loop) is not None,
            cyclic=is_cyclic(loop), coset_pattern=coset)
        classes[key] = [report, 1]
    out = []
    for key in sorted(classes):
        report, size = classes[key]
        out.append(report.model_copy(update={"class_size": size}))
    log.debug("found %d configurations in %d classes", found, len(out))
    return SearchReport(q=space.q, d=space.d, frame=frame, n=n, candidates=candidates, found=found,
                        usable_per_line=usable, classes=out)
