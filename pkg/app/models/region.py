"""
Region Model - scheme identifiers, Pareto frontiers and the Fig. 3 comparison rows
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.errors import InvalidShare


class SchemeKind(str, Enum):
    SC = "sc"
    A = "a"
    B = "b"
    HYBRID = "hybrid"
    GENERALIZED = "generalized"

    @property
    def parametrized(self) -> bool:
        return self in (SchemeKind.HYBRID, SchemeKind.GENERALIZED)


class SchemeId(BaseModel):
    """A delivery scheme, with its (alpha, beta) share when memory-shared."""

    model_config = ConfigDict(frozen=True)

    kind: SchemeKind
    alpha: Optional[float] = None
    beta: Optional[float] = None

    @model_validator(mode="after")
    def _check_share(self) -> "SchemeId":
        if self.kind.parametrized:
            for label in ("alpha", "beta"):
                value = getattr(self, label)
                if value is None or not (0.0 <= value <= 1.0):
                    raise InvalidShare(
                        f"scheme {self.kind.value} needs {label} in [0, 1], got {value}",
                        field=label,
                        value=value,
                    )
        return self

    @classmethod
    def hybrid(cls, alpha: float, beta: float) -> "SchemeId":
        return cls(kind=SchemeKind.HYBRID, alpha=alpha, beta=beta)

    @classmethod
    def generalized(cls, alpha: float, beta: float) -> "SchemeId":
        return cls(kind=SchemeKind.GENERALIZED, alpha=alpha, beta=beta)

    def __str__(self) -> str:
        if self.kind.parametrized:
            return f"{self.kind.value}({self.alpha:g},{self.beta:g})"
        return self.kind.value


class FrontierPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    beta: float
    r1: float
    r2: float

    def covers(self, other: "FrontierPoint") -> bool:
        """True when this point is at least as good as `other` on both links."""
        return self.r1 <= other.r1 and self.r2 <= other.r2


class Frontier(BaseModel):
    """Non-dominated (alpha, beta, r1, r2) points of one scheme, r1 ascending."""

    model_config = ConfigDict(frozen=True)

    scheme: SchemeKind
    resolution: int
    points: List[FrontierPoint] = Field(default_factory=list)


class Dominance(BaseModel):
    """Result of comparing two frontiers; `witness` is a point of b no point of a covers."""

    dominates: bool
    witness: Optional[FrontierPoint] = None


class Fig3Row(BaseModel):
    varied: float
    r1_hybrid: float
    r1_generalized: float
    r2: float
