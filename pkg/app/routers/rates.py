"""
Rates Router - closed-form rates for any scheme
"""
from typing import Optional

from fastapi import APIRouter
from pydantic import Field

from app.records import NetworkParams, OutputRecord, rates_results, scheme_id

router = APIRouter(prefix="/api/v1/rates", tags=["Rates"])


# ========== Pydantic Models ==========

class RatesRequest(NetworkParams):
    scheme: str = Field("sc", description="sc | a | b | hybrid | generalized")
    alpha: Optional[float] = Field(None, ge=0.0, le=1.0)
    beta: Optional[float] = Field(None, ge=0.0, le=1.0)


# ========== Endpoints ==========

@router.post("", response_model=OutputRecord)
def compute_rates(request: RatesRequest):
    """(r1, r2) of one scheme; scheme B also reports the printed r1."""
    config = request.to_config()
    scheme = scheme_id(request.scheme, request.alpha, request.beta)
    return OutputRecord(
        command="rates",
        parameters=request.model_dump(),
        results=rates_results(config, scheme),
    )
