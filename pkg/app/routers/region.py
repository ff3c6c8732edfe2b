"""
Region Router - achievable-region frontiers and the hybrid vs generalized comparison
"""
from typing import List, Literal, Optional

from fastapi import APIRouter
from pydantic import Field

from app.config import settings
from app.models.region import SchemeKind
from app.records import NetworkParams, OutputRecord, compare_results, fig3_results, frontier_results

router = APIRouter(prefix="/api/v1/region", tags=["Region"])


# ========== Pydantic Models ==========

class FrontierRequest(NetworkParams):
    scheme: Literal["hybrid", "generalized"] = "hybrid"
    grid: int = Field(default_factory=lambda: settings.frontier_resolution, ge=2, le=401)


class CompareRequest(NetworkParams):
    grid: int = Field(default_factory=lambda: settings.frontier_resolution, ge=2, le=401)


class Fig3Request(NetworkParams):
    axis: Literal["alpha", "beta"] = "alpha"
    fixed: float = Field(0.5, ge=0.0, le=1.0)
    values: Optional[List[float]] = None


# ========== Endpoints ==========

@router.post("/frontier", response_model=OutputRecord)
def frontier(request: FrontierRequest):
    return OutputRecord(
        command="region-frontier",
        parameters=request.model_dump(),
        results=frontier_results(request.to_config(), SchemeKind(request.scheme), request.grid),
    )


@router.post("/compare", response_model=OutputRecord)
def compare(request: CompareRequest):
    """Both frontiers and dominance in each direction, with a witness when it fails."""
    return OutputRecord(
        command="region-compare",
        parameters=request.model_dump(),
        results=compare_results(request.to_config(), request.grid),
    )


@router.post("/fig3", response_model=OutputRecord)
def fig3(request: Fig3Request):
    return OutputRecord(
        command="region-fig3",
        parameters=request.model_dump(),
        results=fig3_results(request.to_config(), request.axis, request.fixed, request.values),
    )
