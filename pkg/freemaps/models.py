"""
Pydantic models for freemaps reports.

Every diagnostic returns a :class:`Report` subclass. Reports serialize to
JSON with the common keys ``op``, ``inputs``, ``verdict``, ``max_deviation``
and ``samples``; complex numbers are stored as ``[re, im]`` pairs.
"""
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, SerializeAsAny

ComplexPair = Tuple[float, float]


def complex_pair(z: complex) -> ComplexPair:
    z = complex(z)
    return (z.real, z.imag)


def complex_pairs(values: Sequence[complex]) -> List[ComplexPair]:
    return [complex_pair(v) for v in values]


class Verdict(str, Enum):
    """Outcome of a check or probe."""

    PASS = "pass"
    FAIL = "fail"
    CONSISTENT = "consistent-with-injectivity"
    COUNTEREXAMPLE = "counterexample-candidate"
    INCONCLUSIVE = "inconclusive"
    DISTINCT = "distinct-maps"


class Membership(str, Enum):
    """Three-valued membership decided with the pivot floor."""

    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


class Report(BaseModel):
    """Common shape of all diagnostic reports."""

    op: str = Field(..., description="Name of the operation that produced the report")
    inputs: List[str] = Field(
        default_factory=list, description="Fingerprints of the inputs"
    )
    verdict: Verdict = Field(..., description="Overall outcome")
    max_deviation: Optional[float] = Field(
        None, description="Largest deviation observed, when the check measures one"
    )
    samples: List[Dict[str, Any]] = Field(
        default_factory=list, description="Per-sample details in input order"
    )
    notes: List[str] = Field(
        default_factory=list, description="Skipped items and caveats"
    )

    @property
    def passed(self) -> bool:
        return self.verdict in (Verdict.PASS, Verdict.CONSISTENT)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


class MembershipReport(Report):
    membership: Membership
    gap: float = Field(..., description="Smallest eigenvalue of the defining matrix")


class BoundednessReport(Report):
    bound: float = Field(..., gt=0, description="The constant C tested")
    checked: int = 0
    skipped: int = 0
    failures: List[int] = Field(
        default_factory=list, description="Indices of members violating the bound"
    )


class CircularityReport(Report):
    thetas: List[float] = Field(default_factory=list)
    violations: int = 0


class BlockFormulaReport(Report):
    deviations: List[float] = Field(
        default_factory=list, description="Max deviation per map component"
    )


class InjectivityReport(Report):
    hypothesis_residual: float = Field(
        ..., description="||f(X)G - G f(Y)||, the premise of the probe"
    )
    intertwining_residual: float = Field(..., description="||XG - GY||")
    t_max: Optional[float] = None
    t_grid: List[float] = Field(default_factory=list)
    constancy_deviation: Optional[float] = Field(
        None, description="Largest change of f(Z(t)) along the t-grid"
    )


class RayReport(BaseModel):
    index: int
    r_star: Optional[float] = None
    radii: List[float] = Field(default_factory=list)
    domain_gaps: List[float] = Field(default_factory=list)
    codomain_gaps: List[float] = Field(default_factory=list)
    terminal_gap: Optional[float] = None
    error: Optional[str] = None


class PropernessReport(Report):
    rays: List[RayReport] = Field(default_factory=list)
    max_terminal_gap: Optional[float] = None


class AmpliationReport(Report):
    size: int
    base_spectrum: List[ComplexPair] = Field(default_factory=list)
    spectrum: List[ComplexPair] = Field(default_factory=list)
    multiplicity: int
    unimodular: bool = Field(
        ..., description="Whether every size-1 derivative eigenvalue has modulus one"
    )


class LinearityReport(Report):
    skipped: int = 0


class UniquenessReport(Report):
    derivative_gap: float = Field(
        ..., description="||f'(0) - g'(0)|| on 1x1 matrices"
    )


class RankReport(Report):
    smallest_singular_values: List[float] = Field(default_factory=list)
    full_rank: bool


class SuiteReport(Report):
    suite: str
    seed: int
    trials: int
    tolerance: float


class MobiusReport(Report):
    theta: float
    trials: int
    seed: int
    checks: Dict[str, SerializeAsAny[Report]] = Field(default_factory=dict)


class ReferenceValue(BaseModel):
    """A published constant and the tolerance it is reproduced to."""

    expected: float
    tolerance: float
    actual: Optional[float] = None

    @property
    def matches(self) -> bool:
        if self.actual is None:
            return False
        return abs(self.actual - self.expected) <= self.tolerance


class WitnessReport(Report):
    orientation: str
    t: float
    mu: float
    a: float
    b: float
    c1_entry: ComplexPair = Field(..., description="Pencil entry C1")
    c2_entry: ComplexPair = Field(..., description="Pencil entry C2")
    coefficients: List[ComplexPair] = Field(
        default_factory=list, description="Taylor coefficients c_0..c_K of b1"
    )
    r0: float
    c3_over_c1: float
    c5_over_c1: float
    min_eig: float
    tolerances: Dict[str, float] = Field(default_factory=dict)
    reference: Dict[str, ReferenceValue] = Field(default_factory=dict)
