"""
Latin squares, transversals, MOLS and transversal designs TD(k, n).

TD points are the integers 0..kn-1 and part p is the range [p*n, (p+1)*n) for every
design this module builds. Designs read from files keep their own part lists.
"""
from __future__ import annotations
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from sympy import factorint

from .errors import FormatError, NotBlockSize3, NotOrthogonal, SideMismatch, SideTooSmall
from .models import LatinSquarePayload, TDPayload, TransversalPayload, Violation, ViolationCode

log = logging.getLogger(__name__)


def _violation(code: ViolationCode, detail: str, **witness) -> Violation:
    return Violation(code=code, detail=detail, witness=witness)


# ---------- Latin squares ----------
@dataclass(frozen=True)
class LatinSquare:
    n: int
    cells: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.cells) != self.n or any(len(row) != self.n for row in self.cells):
            raise FormatError(f"cells must be a {self.n}x{self.n} array")

    @classmethod
    def of(cls, cells: Sequence[Sequence[int]]) -> "LatinSquare":
        return cls(len(cells), tuple(tuple(int(v) for v in row) for row in cells))

    @classmethod
    def cyclic(cls, n: int) -> "LatinSquare":
        """Addition table of Z_n."""
        return cls.of([[(i + j) % n for j in range(n)] for i in range(n)])

    @classmethod
    def linear(cls, q: int, slope: int) -> "LatinSquare":
        """L(i, j) = slope*i + j over Z_q (q prime)."""
        return cls.of([[(slope * i + j) % q for j in range(q)] for i in range(q)])

    @classmethod
    def from_table(cls, elements: Sequence[Any], op: Callable[[Any, Any], Any]) -> "LatinSquare":
        """Relabel a Cayley table (rows and columns in `elements` order) to symbols 0..n-1."""
        index = {e: i for i, e in enumerate(elements)}
        try:
            return cls.of([[index[op(a, b)] for b in elements] for a in elements])
        except KeyError as e:
            raise FormatError("operation leaves the element list") from e

    def to_payload(self) -> LatinSquarePayload:
        return LatinSquarePayload(n=self.n, cells=[list(r) for r in self.cells])

    @classmethod
    def from_payload(cls, p: LatinSquarePayload) -> "LatinSquare":
        ls = cls.of(p.cells)
        if ls.n != p.n:
            raise FormatError(f"declared n={p.n} but cells are {ls.n}x{ls.n}")
        return ls


@dataclass(frozen=True)
class Transversal:
    sigma: Tuple[int, ...]

    def symbols(self, ls: LatinSquare) -> List[int]:
        return [ls.cells[i][c] for i, c in enumerate(self.sigma)]

    def to_payload(self) -> TransversalPayload:
        return TransversalPayload(sigma=list(self.sigma))

    @classmethod
    def from_payload(cls, p: TransversalPayload) -> "Transversal":
        return cls(tuple(p.sigma))


def validate_latin_square(ls: LatinSquare) -> Optional[Violation]:
    n = ls.n
    if n < 3:
        raise SideTooSmall(f"side {n} < 3")
    for i, row in enumerate(ls.cells):
        for j, s in enumerate(row):
            if not 0 <= s < n:
                return _violation(ViolationCode.symbol_out_of_range, f"cell ({i},{j}) holds {s}", row=i, column=j, symbol=s)
    for i, row in enumerate(ls.cells):
        seen = set()
        for s in row:
            if s in seen:
                return _violation(ViolationCode.row_repeat, f"symbol {s} repeats in row {i}", row=i, symbol=s)
            seen.add(s)
    for j in range(n):
        seen = set()
        for i in range(n):
            s = ls.cells[i][j]
            if s in seen:
                return _violation(ViolationCode.column_repeat, f"symbol {s} repeats in column {j}", column=j, symbol=s)
            seen.add(s)
    return None


def validate_transversal(ls: LatinSquare, t: Transversal) -> Optional[Violation]:
    if sorted(t.sigma) != list(range(ls.n)):
        return _violation(ViolationCode.not_a_permutation, "sigma is not a permutation of the columns", sigma=list(t.sigma))
    seen: Dict[int, int] = {}
    for i, s in enumerate(t.symbols(ls)):
        if s in seen:
            return _violation(ViolationCode.transversal_symbol_repeat,
                              f"symbol {s} appears in rows {seen[s]} and {i}", rows=[seen[s], i], symbol=s)
        seen[s] = i
    return None


def _search_branch(cells: Tuple[Tuple[int, ...], ...], first_col: int, limit: Optional[int]) -> List[Tuple[int, ...]]:
    """All transversals with sigma(0) = first_col, in lexicographic order."""
    n = len(cells)
    found: List[Tuple[int, ...]] = []
    sigma = [first_col] + [0] * (n - 1)

    def step(row: int, cols: int, syms: int) -> bool:
        if row == n:
            found.append(tuple(sigma))
            return limit is not None and len(found) >= limit
        for c in range(n):
            if cols >> c & 1:
                continue
            s = cells[row][c]
            if syms >> s & 1:
                continue
            sigma[row] = c
            if step(row + 1, cols | 1 << c, syms | 1 << s):
                return True
        return False

    step(1, 1 << first_col, 1 << cells[0][first_col])
    return found


def find_transversals(ls: LatinSquare, limit: Optional[int] = None, jobs: int = 1) -> List[Transversal]:
    """Exhaustive row-major backtracking; the first row's column choices are the parallel branches."""
    v = validate_latin_square(ls)
    if v is not None:
        raise FormatError(f"not a Latin square: {v.detail}", witness=v.model_dump(mode="json"))
    log.info("transversal search on a side-%d square (jobs=%d)", ls.n, jobs)
    if jobs > 1 and limit is None:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            branches = pool.map(_search_branch, [ls.cells] * ls.n, range(ls.n), [None] * ls.n)
            sigmas = [s for branch in branches for s in branch]
    else:
        sigmas = []
        for c in range(ls.n):
            remaining = None if limit is None else limit - len(sigmas)
            sigmas.extend(_search_branch(ls.cells, c, remaining))
            if limit is not None and len(sigmas) >= limit:
                break
    sigmas.sort()
    log.debug("found %d transversals", len(sigmas))
    return [Transversal(s) for s in sigmas]


def check_orthogonal(a: LatinSquare, b: LatinSquare) -> Tuple[bool, Optional[Violation]]:
    if a.n != b.n:
        raise SideMismatch(f"sides {a.n} and {b.n} differ")
    seen: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for i in range(a.n):
        for j in range(a.n):
            pair = (a.cells[i][j], b.cells[i][j])
            if pair in seen:
                return False, _violation(ViolationCode.pair_collision, f"pair {pair} occurs twice",
                                         cells=[list(seen[pair]), [i, j]], pair=list(pair))
            seen[pair] = (i, j)
    return True, None


# ---------- transversal designs ----------
@dataclass(frozen=True)
class TransversalDesign:
    k: int
    n: int
    parts: Tuple[Tuple[int, ...], ...]
    blocks: Tuple[Tuple[int, ...], ...]
    T: Optional[Tuple[Tuple[int, ...], ...]] = None
    _index: Dict[Tuple[int, int], int] = field(default=None, init=False, compare=False, repr=False, hash=False)

    @classmethod
    def standard(cls, k: int, n: int, blocks: Sequence[Sequence[int]],
                 T: Optional[Sequence[Sequence[int]]] = None) -> "TransversalDesign":
        parts = tuple(tuple(range(p * n, (p + 1) * n)) for p in range(k))
        return cls(k, n, parts, tuple(tuple(b) for b in blocks), None if T is None else tuple(tuple(b) for b in T))

    @property
    def points(self) -> List[int]:
        return sorted(x for part in self.parts for x in part)

    def part_of(self, x: int) -> int:
        for p, part in enumerate(self.parts):
            if x in part:
                return p
        raise FormatError(f"point {x} is in no part")

    def block_index(self) -> Dict[Tuple[int, int], int]:
        """pair -> index of the block through it (first block wins on bad designs)."""
        if self._index is None:
            index: Dict[Tuple[int, int], int] = {}
            for b, block in enumerate(self.blocks):
                for x, y in combinations(sorted(block), 2):
                    index.setdefault((x, y), b)
            object.__setattr__(self, "_index", index)
        return self._index

    def block_through(self, x: int, y: int) -> Tuple[int, ...]:
        key = (x, y) if x < y else (y, x)
        b = self.block_index().get(key)
        if b is None:
            raise FormatError(f"no block through {x} and {y}")
        return self.blocks[b]

    def meet(self, block: Sequence[int], part: int) -> int:
        members = set(self.parts[part])
        for x in block:
            if x in members:
                return x
        raise FormatError(f"block {list(block)} misses part {part}")

    def with_T(self, T: Sequence[Sequence[int]]) -> "TransversalDesign":
        return TransversalDesign(self.k, self.n, self.parts, self.blocks, tuple(tuple(b) for b in T))

    def to_payload(self) -> TDPayload:
        return TDPayload(k=self.k, n=self.n, parts=[list(p) for p in self.parts],
                         blocks=[list(b) for b in self.blocks],
                         T=None if self.T is None else [list(b) for b in self.T])

    @classmethod
    def from_payload(cls, p: TDPayload) -> "TransversalDesign":
        return cls(p.k, p.n, tuple(tuple(x) for x in p.parts), tuple(tuple(b) for b in p.blocks),
                   None if p.T is None else tuple(tuple(b) for b in p.T))


def validate_td(td: TransversalDesign) -> Optional[Violation]:
    k, n = td.k, td.n
    # 1. parts partition 0..kn-1 into k parts of size n
    if len(td.parts) != k or any(len(p) != n for p in td.parts):
        return _violation(ViolationCode.part_structure, f"expected {k} parts of size {n}",
                          part_sizes=[len(p) for p in td.parts])
    flat = [x for p in td.parts for x in p]
    if sorted(flat) != list(range(k * n)):
        return _violation(ViolationCode.part_structure, f"parts do not partition 0..{k * n - 1}")
    N = k * n
    count = [bytearray(N) for _ in range(N)]

    # 2. every pair in exactly one part or block
    def cover(members: Sequence[int], where: str) -> Optional[Violation]:
        for x, y in combinations(sorted(set(members)), 2):
            if not (0 <= x < N and 0 <= y < N):
                return _violation(ViolationCode.part_structure, f"{where} holds a point outside 0..{N - 1}", points=[x, y])
            if count[x][y]:
                return _violation(ViolationCode.pair_covered_twice, f"pair ({x},{y}) covered again by {where}",
                                  pair=[x, y], where=where)
            count[x][y] = 1
        return None

    for p, part in enumerate(td.parts):
        v = cover(part, f"part {p}")
        if v:
            return v
    for b, block in enumerate(td.blocks):
        v = cover(block, f"block {b}")
        if v:
            return v
    for x in range(N):
        row = count[x]
        for y in range(x + 1, N):
            if not row[y]:
                return _violation(ViolationCode.pair_uncovered, f"pair ({x},{y}) lies in no part or block", pair=[x, y])
    # 3. n^2 blocks, each meeting every part once
    if len(td.blocks) != n * n:
        return _violation(ViolationCode.block_count, f"{len(td.blocks)} blocks, expected {n * n}", blocks=len(td.blocks))
    part_of = {x: p for p, part in enumerate(td.parts) for x in part}
    for b, block in enumerate(td.blocks):
        hits = sorted(part_of.get(x, -1) for x in block)
        if hits != list(range(k)):
            return _violation(ViolationCode.block_part_meet, f"block {b} does not meet each part once",
                              block=list(block), parts=hits)
    # 4. T is n disjoint blocks covering V
    if td.T is not None:
        block_set = {tuple(sorted(b)) for b in td.blocks}
        covered: set = set()
        if len(td.T) != n:
            return _violation(ViolationCode.t_not_partition, f"T has {len(td.T)} blocks, expected {n}")
        for b in td.T:
            if tuple(sorted(b)) not in block_set:
                return _violation(ViolationCode.t_not_partition, "T member is not a block", block=list(b))
            if covered & set(b):
                return _violation(ViolationCode.t_not_partition, "T blocks overlap", block=list(b))
            covered |= set(b)
        if len(covered) != N:
            return _violation(ViolationCode.t_not_partition, "T does not cover every point")
    return None


def latin_to_td(ls: LatinSquare, transversal: Optional[Transversal] = None) -> TransversalDesign:
    """Blocks {i, n+j, 2n+a_ij}; a transversal becomes the partition T."""
    n = ls.n
    blocks = [(i, n + j, 2 * n + ls.cells[i][j]) for i in range(n) for j in range(n)]
    T = None
    if transversal is not None:
        v = validate_transversal(ls, transversal)
        if v is not None:
            raise FormatError(f"not a transversal: {v.detail}", witness=v.model_dump(mode="json"))
        T = [(i, n + c, 2 * n + ls.cells[i][c]) for i, c in enumerate(transversal.sigma)]
    return TransversalDesign.standard(3, n, blocks, T)


def _part_positions(td: TransversalDesign) -> Dict[int, Tuple[int, int]]:
    return {x: (p, pos) for p, part in enumerate(td.parts) for pos, x in enumerate(part)}


def td_to_latin(td: TransversalDesign) -> LatinSquare:
    if td.k != 3:
        raise NotBlockSize3(f"block size {td.k} != 3")
    return td_to_mols(td)[0]


def td_to_mols(td: TransversalDesign) -> List[LatinSquare]:
    """Squares L_r[i][j] = position in part r+2 of the block through positions i (part 0) and j (part 1)."""
    if td.k < 3:
        raise NotBlockSize3(f"block size {td.k} < 3 carries no square")
    where = _part_positions(td)
    n = td.n
    cells = [[[0] * n for _ in range(n)] for _ in range(td.k - 2)]
    for block in td.blocks:
        pos = dict(where[x] for x in block)
        for r in range(td.k - 2):
            cells[r][pos[0]][pos[1]] = pos[r + 2]
    return [LatinSquare.of(c) for c in cells]


def mols_to_td(squares: Sequence[LatinSquare]) -> TransversalDesign:
    if not squares:
        raise FormatError("empty MOLS set")
    n = squares[0].n
    for s in squares:
        if s.n != n:
            raise SideMismatch(f"sides {n} and {s.n} differ")
        v = validate_latin_square(s)
        if v is not None:
            raise FormatError(f"not a Latin square: {v.detail}", witness=v.model_dump(mode="json"))
    for (a, sa), (b, sb) in combinations(enumerate(squares), 2):
        ok, v = check_orthogonal(sa, sb)
        if not ok:
            raise NotOrthogonal(f"squares {a} and {b} are not orthogonal",
                                witness={"squares": [a, b], **v.witness})
    k = len(squares) + 2
    blocks = [(i, n + j) + tuple((r + 2) * n + s.cells[i][j] for r, s in enumerate(squares))
              for i in range(n) for j in range(n)]
    return TransversalDesign.standard(k, n, blocks)


# ---------- the loop on the first part ----------
@dataclass(frozen=True)
class LoopTable:
    elements: Tuple[int, ...]             # points of P1, row/column order of the table
    table: Tuple[Tuple[int, ...], ...]    # indices into `elements`
    identity: int
    associative: bool
    abelian: bool

    @property
    def order(self) -> int:
        return len(self.elements)


def loop_operation(td: TransversalDesign, one1: Optional[int] = None, one2: Optional[int] = None) -> LoopTable:
    """X' = (1_2 X) n P3, Y' = (1_3 Y) n P2, X.Y = (X' Y') n P1 with 1_3 = (1_1 1_2) n P3."""
    if td.k < 3:
        raise NotBlockSize3("the loop needs three parts")
    P1 = td.parts[0]
    one1 = min(P1) if one1 is None else one1
    one2 = min(td.parts[1]) if one2 is None else one2
    if one1 not in P1 or one2 not in td.parts[1]:
        raise FormatError("base points must lie in the first two parts")
    one3 = td.meet(td.block_through(one1, one2), 2)
    elems = tuple(sorted(P1))
    index = {x: i for i, x in enumerate(elems)}
    x_dash = {X: td.meet(td.block_through(one2, X), 2) for X in elems}
    y_dash = {Y: td.meet(td.block_through(one3, Y), 1) for Y in elems}
    table = tuple(
        tuple(index[td.meet(td.block_through(x_dash[X], y_dash[Y]), 0)] for Y in elems)
        for X in elems
    )
    n = len(elems)
    e = index[one1]
    associative = all(table[table[a][b]][c] == table[a][table[b][c]]
                      for a in range(n) for b in range(n) for c in range(n))
    abelian = all(table[a][b] == table[b][a] for a in range(n) for b in range(a + 1, n))
    return LoopTable(elems, table, e, associative, abelian)


def check_loop(t: LoopTable) -> Optional[Violation]:
    """Latin property plus two-sided identity."""
    n = t.order
    ls = LatinSquare.of(t.table)
    if n >= 3:
        v = validate_latin_square(ls)
        if v is not None:
            return _violation(ViolationCode.not_a_loop, v.detail, **v.witness)
    e = t.identity
    for x in range(n):
        if t.table[e][x] != x or t.table[x][e] != x:
            return _violation(ViolationCode.not_a_loop, f"identity fails at element {x}", element=x)
    return None


def elementary_abelian_prime(t: LoopTable) -> Optional[int]:
    """p when the loop is an elementary abelian p-group, else None."""
    if not (t.associative and t.abelian) or t.order < 2:
        return None
    primes = factorint(t.order)
    if len(primes) != 1:
        return None
    p = next(iter(primes))
    if any(k != p for k in _power_orders(t.table, t.identity) if k != 1):
        return None
    return p


def is_cyclic(t: LoopTable) -> bool:
    return t.associative and t.order in _power_orders(t.table, t.identity)


# ---------- isomorphism of Cayley tables ----------
def _identity_of(t: Sequence[Sequence[int]]) -> Optional[int]:
    n = len(t)
    return next((e for e in range(n) if all(t[e][x] == x and t[x][e] == x for x in range(n))), None)


def _closure(t: Sequence[Sequence[int]], seed: Sequence[int]) -> set:
    span = set(seed)
    frontier = list(span)
    while frontier:
        new = []
        for a in frontier:
            for b in list(span):
                for c in (t[a][b], t[b][a]):
                    if c not in span:
                        span.add(c)
                        new.append(c)
        frontier = new
    return span


def _power_orders(t: Sequence[Sequence[int]], e: Optional[int]) -> List[int]:
    n = len(t)
    out = []
    for x in range(n):
        y, k = x, 1
        while y != e and k <= n:
            y = t[y][x]
            k += 1
        out.append(k)
    return out


def find_isomorphism(t1: Sequence[Sequence[int]], t2: Sequence[Sequence[int]]) -> Optional[List[int]]:
    """Bijection phi with phi(t1[a][b]) = t2[phi a][phi b], found by extending generator images."""
    n = len(t1)
    if len(t2) != n:
        return None
    e1, e2 = _identity_of(t1), _identity_of(t2)
    if (e1 is None) != (e2 is None):
        return None
    gens: List[int] = []
    span: set = set() if e1 is None else {e1}
    for x in range(n):
        if x not in span:
            gens.append(x)
            span = _closure(t1, list(span) + [x])
    ord1, ord2 = _power_orders(t1, e1), _power_orders(t2, e2)

    def extend(phi: Dict[int, int]) -> Optional[Dict[int, int]]:
        phi = dict(phi)
        used = set(phi.values())
        changed = True
        while changed:
            changed = False
            for a in list(phi):
                for b in list(phi):
                    c, img = t1[a][b], t2[phi[a]][phi[b]]
                    if c in phi:
                        if phi[c] != img:
                            return None
                    elif img in used:
                        return None
                    else:
                        phi[c] = img
                        used.add(img)
                        changed = True
        return phi

    start = {} if e1 is None else {e1: e2}

    def search(i: int, phi: Dict[int, int]) -> Optional[Dict[int, int]]:
        if i == len(gens):
            return phi if len(phi) == n else None
        g = gens[i]
        if g in phi:
            return search(i + 1, phi)
        for cand in range(n):
            if cand in phi.values() or ord1[g] != ord2[cand]:
                continue
            trial = dict(phi)
            trial[g] = cand
            ext = extend(trial)
            if ext is not None:
                found = search(i + 1, ext)
                if found is not None:
                    return found
        return None

    phi = search(0, extend(start) or start)
    if phi is None:
        return None
    mapping = [phi[x] for x in range(n)]
    if all(mapping[t1[a][b]] == t2[mapping[a]][mapping[b]] for a in range(n) for b in range(n)):
        return mapping
    return None
