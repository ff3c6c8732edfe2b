"""
Gap Model - inequality checks, per-point gap reports and sweep summaries
"""
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from app.models.bounds import BoundSet, RegimeLabel

R2_NOTE = (
    "r2 is certified with multiplicative constant 1/20 and additive 4, "
    "which implies the weaker 1/48 statement of the order-optimality theorem; both are reported"
)


class InequalityCheck(BaseModel):
    """lhs >= c_mult * rhs - c_add, with slack = lhs - (c_mult * rhs - c_add)."""

    name: str
    c_mult: float
    c_add: float
    lhs: float
    rhs: float
    slack: float
    passed: bool
    informational: bool = False


class WitnessCheck(BaseModel):
    """A fixed (s1, s2) or t choice for a case, its cut-set value, and whether the scan dominates it."""

    case: str
    s1: Optional[int] = None
    s2: Optional[int] = None
    t: Optional[int] = None
    valid: bool
    value: Optional[float] = None
    dominated: bool


class GapReport(BaseModel):
    library_size: int
    helper_count: int
    users_per_helper: int
    helper_memory: float
    user_memory: float
    label: RegimeLabel
    bounds: BoundSet
    case_constants: Tuple[float, float]
    checks: List[InequalityCheck] = Field(default_factory=list)
    witnesses: List[WitnessCheck] = Field(default_factory=list)

    def check(self, name: str) -> Optional[InequalityCheck]:
        for item in self.checks:
            if item.name == name:
                return item
        return None

    @property
    def theorem_passed(self) -> bool:
        return all(c.passed for c in self.checks if c.name.startswith("theorem1"))

    @property
    def passed(self) -> bool:
        """Every non-informational check passed and the envelope held."""
        return self.bounds.envelope_ok and all(c.passed for c in self.checks if not c.informational)


class SweepSummary(BaseModel):
    points: int
    theorem_failures: int
    case_failures: int
    envelope_failures: int
    witness_failures: int
    min_slack: Dict[str, float] = Field(default_factory=dict)
    worst_point: Dict[str, Tuple[float, float]] = Field(default_factory=dict)
    failures: List[Tuple[float, float, str]] = Field(default_factory=list)
    note: str = R2_NOTE

    @property
    def passed(self) -> bool:
        return self.theorem_failures == 0 and self.case_failures == 0 and self.envelope_failures == 0


class SweepResult(BaseModel):
    reports: List[GapReport]
    summary: SweepSummary
