"""
Bounds Model - regime labels, lower/upper bound sets and per-tuple evaluations
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field

from app.models.network import RatePair


class Regime(str, Enum):
    """I: M1 + K2*M2 < N.  II: M1 + K2*M2 >= N."""
    I = "I"
    II = "II"


class SubRegime(str, Enum):
    """I: M1 < N/2.  II: M1 >= N/2."""
    I = "I"
    II = "II"


class RegimeLabel(BaseModel):
    regime: Regime
    subregime: SubRegime
    case: str
    matching_cases: List[str] = Field(default_factory=list)

    @property
    def boundary(self) -> bool:
        """True when the point satisfies more than one case predicate."""
        return len(self.matching_cases) > 1

    @property
    def key(self) -> str:
        return f"{self.regime.value}.{self.subregime.value}.{self.case}"


class TupleEvaluation(BaseModel):
    """Hybrid rates at one candidate (alpha, beta) and that tuple's own closed-form bound."""

    name: str
    alpha: float
    beta: float
    rates: RatePair
    r1_bound: float
    r2_bound: float
    within: bool


class BoundSet(BaseModel):
    r1_lb: float
    r2_lb: float
    r1_ub: float
    r2_ub: float
    alpha_star: float
    beta_star: float
    s1: int
    s2: int
    t: int
    hybrid: RatePair
    envelope_ok: bool = True
    tuples: List[TupleEvaluation] = Field(default_factory=list)
    chosen_tuple: Optional[str] = None
