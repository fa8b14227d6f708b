from __future__ import annotations
import enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, RootModel


class FieldKind(str, enum.Enum):
    prime_field = "prime_field"
    finite_field = "finite_field"
    rationals = "rationals"
    number_field = "number_field"
    quaternion = "quaternion"
    quaternion_cm = "quaternion_cm"
    cyclic_algebra = "cyclic_algebra"


class Side(str, enum.Enum):
    left = "left"
    right = "right"


class GroupKind(str, enum.Enum):
    additive = "additive"
    multiplicative = "multiplicative"
    semidirect = "semidirect"


class FrameKind(str, enum.Enum):
    additive = "additive"
    multiplicative = "multiplicative"
    semidirect = "semidirect"
    external = "external"


class FrameShape(str, enum.Enum):
    concurrent = "concurrent"
    triangle = "triangle"


class ViolationCode(str, enum.Enum):
    # latin squares / transversals
    row_repeat = "row_repeat"
    column_repeat = "column_repeat"
    symbol_out_of_range = "symbol_out_of_range"
    not_a_permutation = "not_a_permutation"
    transversal_symbol_repeat = "transversal_symbol_repeat"
    pair_collision = "pair_collision"
    # transversal designs
    part_structure = "part_structure"
    pair_covered_twice = "pair_covered_twice"
    pair_uncovered = "pair_uncovered"
    block_count = "block_count"
    block_part_meet = "block_part_meet"
    t_not_partition = "t_not_partition"
    # groups
    closure = "closure"
    identity_missing = "identity_missing"
    inverse_missing = "inverse_missing"
    duplicate_element = "duplicate_element"
    # embeddings
    not_injective = "not_injective"
    block_not_collinear = "block_not_collinear"
    point_off_hyperplane = "point_off_hyperplane"
    hyperplanes_not_distinct = "hyperplanes_not_distinct"
    lines_not_distinct = "lines_not_distinct"
    line_in_hyperplane = "line_in_hyperplane"
    infinity_on_hyperplane = "infinity_on_hyperplane"
    transversal_not_concurrent = "transversal_not_concurrent"
    # loops
    not_a_loop = "not_a_loop"


class Violation(BaseModel):
    code: ViolationCode
    detail: str
    witness: Dict[str, Any] = Field(default_factory=dict)


# ---------- JSON file formats ----------
class LatinSquarePayload(BaseModel):
    n: int
    cells: List[List[int]]


class TransversalPayload(BaseModel):
    sigma: List[int]


class MOLSPayload(RootModel[List[LatinSquarePayload]]):
    pass


class TDPayload(BaseModel):
    k: int
    n: int
    parts: List[List[int]]
    blocks: List[List[int]]
    T: Optional[List[List[int]]] = None


class GroupPayload(BaseModel):
    kind: GroupKind
    descriptor: str
    dim: int = 0
    name: Optional[str] = None
    elements: List[Any]


class PointPayload(BaseModel):
    id: int
    coords: List[Any]


class EmbeddingPayload(BaseModel):
    descriptor: str
    d: int
    frame: FrameKind = FrameKind.external
    k: int
    n: int
    parts: List[List[int]]
    points: List[PointPayload]
    part_hyperplanes: List[List[Any]]
    blocks: List[List[int]]
    T: Optional[List[List[int]]] = None
    infinity: Optional[List[Any]] = None
    group: Optional[GroupPayload] = None


class VerificationReport(BaseModel):
    ok: bool
    violation: Optional[Violation] = None
    proper: Optional[bool] = None
    flat_dim: Optional[int] = None


class LemmaReport(BaseModel):
    order: int
    sum_zero: str
    order_nonzero: bool
    no_order_p: str
    shift_rigid: str
    shift_witnesses: List[List[Any]] = Field(default_factory=list)


class Conclusion(BaseModel):
    rule: str
    holds: bool
    detail: str


class ClassificationReport(BaseModel):
    d: int
    n: int
    k: int
    characteristic: int
    flat_dim: int
    shape: str
    proper: bool
    loop_associative: bool
    loop_abelian: bool
    loop_elementary_abelian: bool
    conclusions: List[Conclusion] = Field(default_factory=list)
    explanation: str = ""


class TransversalPointsReport(BaseModel):
    description: str
    count: int
    dg_size: int
    points: List[List[Any]]
    brute_force: Optional[List[List[Any]]] = None
    agree: Optional[bool] = None


class ImproperTransversalReport(BaseModel):
    d: int
    hyperplane: Optional[List[Any]] = None
    points_contained: bool
    infinity_contained: bool
    is_transversal_point: bool
    verdict: str


class PGSpaceReport(BaseModel):
    q: int
    d: int
    descriptor: str
    points: int
    hyperplanes: int
    points_per_hyperplane: List[int]
    hyperplanes_per_point: List[int]


class ConfigurationReport(BaseModel):
    parts: List[List[List[Any]]]
    class_size: int
    associative: bool
    abelian: bool
    elementary_abelian: bool
    cyclic: bool
    coset_pattern: bool


class SearchReport(BaseModel):
    q: int
    d: int
    frame: FrameShape
    n: int
    candidates: int
    found: int
    usable_per_line: List[int] = Field(default_factory=list)
    vacuous: bool = False
    classes: List[ConfigurationReport] = Field(default_factory=list)
