"""
Bounds Router - lower/upper bounds, case labels and order-optimality checks
"""
from typing import Optional

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.records import NetworkParams, OutputRecord, bounds_results, gap_point_results, gap_sweep_results

router = APIRouter(prefix="/api/v1", tags=["Bounds"])


# ========== Pydantic Models ==========

class SweepRequest(BaseModel):
    n: int
    k1: int
    k2: int
    grid: int = Field(41, ge=1, le=201)
    threads: Optional[int] = Field(None, ge=1)
    include_rows: bool = True


# ========== Endpoints ==========

@router.post("/bounds", response_model=OutputRecord)
def compute_bounds(request: NetworkParams):
    """Cut-set lower bounds, chosen tuple and envelopes; 500 on an envelope breach."""
    return OutputRecord(
        command="bounds",
        parameters=request.model_dump(),
        results=bounds_results(request.to_config()),
    )


@router.post("/gap/point", response_model=OutputRecord)
def gap_point(request: NetworkParams):
    return OutputRecord(
        command="gap-point",
        parameters=request.model_dump(),
        results=gap_point_results(request.to_config()),
    )


@router.post("/gap/sweep", response_model=OutputRecord)
def gap_sweep(request: SweepRequest):
    """Grid certification; failing checks are reported in the summary, not as errors."""
    template = NetworkParams(n=request.n, k1=request.k1, k2=request.k2).to_config()
    return OutputRecord(
        command="gap-sweep",
        parameters=request.model_dump(),
        results=gap_sweep_results(template, request.grid, threads=request.threads, rows=request.include_rows),
    )
