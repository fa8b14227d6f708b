"""
Right-projective geometry over a skew field.

Sides are fixed once for the whole package:
  - points are column vectors of a RIGHT vector space, [x] = [x*lam];
  - hyperplanes carry LEFT coefficients, sum(alpha_i * x_i) = 0, and alpha ~ mu*alpha;
  - linear maps act on the left of points, y = M x.
"""
from __future__ import annotations
import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .errors import DegenerateInput, DescriptorMismatch, LineInHyperplane, SingularSystem
from .exactalg import FieldDescriptor, Scalar, elements, scalar
from .models import Side

log = logging.getLogger(__name__)

Row = Tuple[Scalar, ...]


def _same_descriptor(rows: Sequence[Sequence[Scalar]]) -> Optional[FieldDescriptor]:
    f = None
    for row in rows:
        for x in row:
            if f is None:
                f = x.descriptor
            elif x.descriptor != f:
                raise DescriptorMismatch(f"mixed descriptors {f.name} and {x.descriptor.name}")
    return f


# ---------- elimination ----------
def _echelon(rows: Sequence[Sequence[Scalar]], side: Side) -> Tuple[List[List[Scalar]], List[int]]:
    """
    Reduced row echelon form.
    side=right: row operations multiply on the LEFT (preserves {x : A x = 0}).
    side=left:  row operations multiply on the RIGHT (preserves the right span of the rows).
    """
    A = [list(r) for r in rows]
    if not A:
        return A, []
    width = len(A[0])
    pivots: List[int] = []
    r = 0
    for col in range(width):
        pivot = next((i for i in range(r, len(A)) if not A[i][col].is_zero()), None)
        if pivot is None:
            continue
        A[r], A[pivot] = A[pivot], A[r]
        p_inv = A[r][col].inv()
        if side is Side.right:
            A[r] = [p_inv * v for v in A[r]]
        else:
            A[r] = [v * p_inv for v in A[r]]
        for i in range(len(A)):
            if i == r or A[i][col].is_zero():
                continue
            c = A[i][col]
            if side is Side.right:
                A[i] = [v - c * w for v, w in zip(A[i], A[r])]
            else:
                A[i] = [v - w * c for v, w in zip(A[i], A[r])]
        pivots.append(col)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def rank_and_solve(rows: Sequence[Sequence[Scalar]], side: Side = Side.right) -> Tuple[int, List[Row]]:
    """
    Rank of `rows` plus a basis of the nullspace on `side`.

    side=right: vectors x with sum_j A[i][j] * x_j = 0 (point solutions, closed under x*lam).
    side=left:  coefficient vectors a with sum_j a_j * A[i][j] = 0 (hyperplanes through
                every row read as a point, closed under mu*a).
    """
    _same_descriptor(rows)
    if not rows:
        return 0, []
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DegenerateInput("ragged matrix")
    side = Side(side)
    R, pivots = _echelon(rows, side)
    f = rows[0][0].descriptor
    free = [c for c in range(width) if c not in pivots]
    basis: List[Row] = []
    for fc in free:
        v = [f.zero()] * width
        v[fc] = f.one()
        for r, pc in enumerate(pivots):
            v[pc] = -R[r][fc]
        basis.append(tuple(v))
    return len(pivots), basis


def invert_matrix(M: Sequence[Sequence[Scalar]]) -> List[List[Scalar]]:
    """Two-sided inverse of a square matrix (Gauss-Jordan with left row operations)."""
    n = len(M)
    f = _same_descriptor(M)
    aug = [list(row) + [f.one() if i == j else f.zero() for j in range(n)] for i, row in enumerate(M)]
    R, pivots = _echelon(aug, Side.right)
    if pivots[:n] != list(range(n)) or len(R) < n:
        raise SingularSystem("matrix is not invertible")
    return [row[n:] for row in R]


def matmul_vec(M: Sequence[Sequence[Scalar]], x: Sequence[Scalar]) -> List[Scalar]:
    out = []
    for row in M:
        acc = x[0].descriptor.zero()
        for m, v in zip(row, x):
            acc = acc + m * v
        out.append(acc)
    return out


# ---------- points and hyperplanes ----------
@dataclass(frozen=True)
class HomPoint:
    """A projective point in canonical form (last nonzero coordinate is 1)."""

    coords: Row

    @property
    def descriptor(self) -> FieldDescriptor:
        return self.coords[0].descriptor

    @property
    def d(self) -> int:
        return len(self.coords) - 1

    def encode(self) -> list:
        return [c.encode() for c in self.coords]

    def __repr__(self):
        return f"[{', '.join(str(c.encode()) for c in self.coords)}]"


@dataclass(frozen=True)
class Hyperplane:
    """A hyperplane sum(alpha_i x_i) = 0 in canonical form (first nonzero coefficient is 1)."""

    coeffs: Row

    @property
    def descriptor(self) -> FieldDescriptor:
        return self.coeffs[0].descriptor

    @property
    def d(self) -> int:
        return len(self.coeffs) - 1

    def encode(self) -> list:
        return [c.encode() for c in self.coeffs]

    def __repr__(self):
        return f"H({', '.join(str(c.encode()) for c in self.coeffs)})"


def _typed(f: FieldDescriptor, values: Iterable) -> Row:
    return tuple(scalar(f, v) for v in values)


def point(f: FieldDescriptor, *coords) -> HomPoint:
    """Canonical point from raw coordinates (ints, encodings or Scalars)."""
    xs = _typed(f, coords)
    _same_descriptor([xs])
    last = next((c for c in reversed(xs) if not c.is_zero()), None)
    if last is None:
        raise DegenerateInput("the zero vector is not a projective point")
    if len(xs) < 2:
        raise DegenerateInput("projective points need at least two coordinates")
    if last.is_one():
        return HomPoint(xs)
    inv = last.inv()
    return HomPoint(tuple(c * inv for c in xs))


def hyperplane(f: FieldDescriptor, *coeffs) -> Hyperplane:
    """Canonical hyperplane from raw left coefficients."""
    al = _typed(f, coeffs)
    _same_descriptor([al])
    first = next((c for c in al if not c.is_zero()), None)
    if first is None:
        raise DegenerateInput("all-zero coefficients do not define a hyperplane")
    if first.is_one():
        return Hyperplane(al)
    inv = first.inv()
    return Hyperplane(tuple(inv * c for c in al))


def coordinate_hyperplane(f: FieldDescriptor, d: int, index: int) -> Hyperplane:
    """x_{index} = 0, with 0-based `index`."""
    return hyperplane(f, *[1 if i == index else 0 for i in range(d + 1)])


def difference_hyperplane(f: FieldDescriptor, d: int, i: int, j: int, a=1) -> Hyperplane:
    """x_i - a*x_j = 0 (0-based indices)."""
    coeffs: List = [0] * (d + 1)
    coeffs[i] = 1
    coeffs[j] = -scalar(f, a)
    return hyperplane(f, *coeffs)


def normalize_at(p: HomPoint, index: int) -> Row:
    """Coordinates of `p` rescaled on the right so that coordinate `index` is 1."""
    c = p.coords[index]
    if c.is_zero():
        raise DegenerateInput(f"coordinate {index} of {p!r} is zero")
    inv = c.inv()
    return tuple(x * inv for x in p.coords)


def evaluate(h: Hyperplane, p: HomPoint) -> Scalar:
    if h.descriptor != p.descriptor:
        raise DescriptorMismatch(f"{h.descriptor.name} hyperplane vs {p.descriptor.name} point")
    if len(h.coeffs) != len(p.coords):
        raise DescriptorMismatch(f"dimension mismatch: P^{h.d} hyperplane vs P^{p.d} point")
    acc = p.descriptor.zero()
    for a, x in zip(h.coeffs, p.coords):
        if not a.is_zero() and not x.is_zero():
            acc = acc + a * x
    return acc


def incident(p: HomPoint, h: Hyperplane) -> bool:
    return evaluate(h, p).is_zero()


# ---------- flats ----------
@dataclass(frozen=True)
class Flat:
    """Right subspace stored by a reduced echelon basis, so equal flats compare equal."""

    basis: Tuple[Row, ...]
    ambient: int

    @property
    def dim(self) -> int:
        return len(self.basis) - 1

    def is_empty(self) -> bool:
        return not self.basis

    def points(self) -> List[HomPoint]:
        return [point(v[0].descriptor, *v) for v in self.basis]

    def contains(self, p: HomPoint) -> bool:
        if not self.basis:
            return False
        rank, _ = rank_and_solve(list(self.basis) + [p.coords], Side.left)
        return rank == len(self.basis)

    def in_hyperplane(self, h: Hyperplane) -> bool:
        return all(_dot(h.coeffs, v).is_zero() for v in self.basis)

    def hyperplanes(self) -> List[Hyperplane]:
        """A basis of the hyperplanes containing this flat."""
        if not self.basis:
            raise DegenerateInput("the empty flat lies in every hyperplane")
        _, sols = rank_and_solve(list(self.basis), Side.left)
        return [hyperplane(v[0].descriptor, *v) for v in sols]

    def encode(self) -> list:
        return [[c.encode() for c in v] for v in self.basis]


def _flat_from_vectors(vectors: Sequence[Row], ambient: int) -> Flat:
    if not vectors:
        return Flat((), ambient)
    R, _ = _echelon(vectors, Side.left)
    return Flat(tuple(tuple(r) for r in R), ambient)


def span_flat(points: Iterable[HomPoint]) -> Flat:
    pts = list(points)
    if not pts:
        raise DegenerateInput("span of no points")
    d = pts[0].d
    if any(p.d != d for p in pts):
        raise DescriptorMismatch("points live in different dimensions")
    _same_descriptor([p.coords for p in pts])
    return _flat_from_vectors([p.coords for p in pts], d)


def intersect_hyperplanes(hs: Iterable[Hyperplane]) -> Flat:
    hs = list(hs)
    if not hs:
        raise DegenerateInput("intersection of no hyperplanes")
    d = hs[0].d
    _, sols = rank_and_solve([h.coeffs for h in hs], Side.right)
    return _flat_from_vectors(sols, d)


def line_through(p: HomPoint, q: HomPoint) -> Flat:
    line = span_flat([p, q])
    if line.dim != 1:
        raise DegenerateInput(f"{p!r} and {q!r} do not span a line")
    return line


def third_intersection(line: Flat, h: Hyperplane) -> HomPoint:
    """The unique point of `line` on `h`."""
    if line.dim != 1:
        raise DegenerateInput(f"expected a line, got a {line.dim}-flat")
    f = h.descriptor
    p, q = line.basis
    a = _dot(h.coeffs, p)
    b = _dot(h.coeffs, q)
    if a.is_zero() and b.is_zero():
        raise LineInHyperplane(f"line {line.encode()} lies in {h!r}",
                               witness={"line": line.encode(), "hyperplane": h.encode()})
    if b.is_zero():
        return point(f, *q)
    # (p + q*mu) with a + b*mu = 0
    mu = -(b.inv() * a)
    return point(f, *[x + y * mu for x, y in zip(p, q)])


def _dot(alpha: Row, x: Row) -> Scalar:
    acc = x[0].descriptor.zero()
    for a, v in zip(alpha, x):
        acc = acc + a * v
    return acc


def project_from(center: HomPoint, p: HomPoint, target: Hyperplane) -> HomPoint:
    """Intersection of the line (center, p) with `target`."""
    if center == p:
        raise DegenerateInput("projection center coincides with the point")
    if incident(center, target):
        raise DegenerateInput(f"projection center {center!r} lies on the target")
    return third_intersection(line_through(center, p), target)


def collinear(points: Sequence[HomPoint]) -> bool:
    return span_flat(points).dim <= 1


# ---------- linear maps and frame changes ----------
@dataclass(frozen=True)
class FrameChange:
    """An invertible linear map y = M x with a tag naming the frame family it preserves."""

    matrix: Tuple[Row, ...]
    family: str = "general"

    def apply_point(self, p: HomPoint) -> HomPoint:
        return point(p.descriptor, *matmul_vec(self.matrix, p.coords))

    def apply_hyperplane(self, h: Hyperplane) -> Hyperplane:
        # alpha' = alpha * M^-1 keeps alpha' (M x) = alpha x
        inv = invert_matrix(self.matrix)
        n = len(inv)
        coeffs = []
        for j in range(n):
            acc = h.descriptor.zero()
            for i in range(n):
                acc = acc + h.coeffs[i] * inv[i][j]
            coeffs.append(acc)
        return hyperplane(h.descriptor, *coeffs)


def apply_linear_map(points: Iterable[HomPoint], matrix: Sequence[Sequence[Scalar]]) -> List[HomPoint]:
    change = FrameChange(tuple(tuple(r) for r in matrix))
    return [change.apply_point(p) for p in points]


def additive_frame_change(f: FieldDescriptor, T: Sequence[Sequence], a) -> FrameChange:
    """[x, y, z] -> [T x, a y, a z] with x in D^{d-1}; preserves the concurrent frame."""
    m = len(T)
    a = scalar(f, a)
    size = m + 2
    rows = []
    for i in range(size):
        row = [f.zero()] * size
        if i < m:
            for j in range(m):
                row[j] = scalar(f, T[i][j])
        else:
            row[i] = a
        rows.append(tuple(row))
    change = FrameChange(tuple(rows), "additive")
    invert_matrix(change.matrix)
    return change


def semidirect_frame_change(f: FieldDescriptor, a, v: Sequence, T: Sequence[Sequence]) -> FrameChange:
    """[al, be, ga, x] -> [a al, a be, a ga, v (al + be - ga) + T x]; preserves the triangle frame."""
    m = len(T)
    a = scalar(f, a)
    v = [scalar(f, c) for c in v]
    if len(v) != m:
        raise DegenerateInput("translation vector and T disagree on d-2")
    size = m + 3
    rows = []
    for i in range(3):
        row = [f.zero()] * size
        row[i] = a
        rows.append(tuple(row))
    for r in range(m):
        row = [v[r], v[r], -v[r]] + [scalar(f, T[r][j]) for j in range(m)]
        rows.append(tuple(row))
    change = FrameChange(tuple(rows), "semidirect")
    invert_matrix(change.matrix)
    return change


def all_points(f: FieldDescriptor, d: int) -> List[HomPoint]:
    """Every point of P^d(F_q) in canonical form (finite descriptors only)."""
    elems = elements(f)
    out: List[HomPoint] = []
    one, zero = f.one(), f.zero()
    # canonical form: the last nonzero coordinate is 1
    for last in range(d, -1, -1):
        tail = (one,) + (zero,) * (d - last)
        for head in itertools.product(elems, repeat=last):
            out.append(HomPoint(tuple(head) + tail))
    return out
