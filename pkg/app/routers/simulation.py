"""
Simulation Router - bit-level placement, delivery and decoding
"""
from typing import List, Optional, Union

from fastapi import APIRouter
from loguru import logger
from pydantic import Field

from app.config import settings
from app.records import NetworkParams, OutputRecord, scheme_id, simulate_results

router = APIRouter(prefix="/api/v1/simulate", tags=["Simulation"])


class SimulateRequest(NetworkParams):
    scheme: str = "sc"
    alpha: Optional[float] = Field(None, ge=0.0, le=1.0)
    beta: Optional[float] = Field(None, ge=0.0, le=1.0)
    file_bits: int = Field(default_factory=lambda: settings.default_file_bits, description="F, bits per file")
    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    demands: Union[str, List[int], None] = Field(
        None, description="'uniform-random', comma-separated indices, or a list (i-major)"
    )
    transcripts: bool = Field(False, description="Include one record per delivered message")


@router.post("", response_model=OutputRecord)
def simulate(request: SimulateRequest):
    """Run one scheme end to end; invariant failures surface as HTTP 500."""
    config = request.to_config()
    scheme = scheme_id(request.scheme, request.alpha, request.beta)
    logger.info(f"API simulate {scheme} N={config.n} F={request.file_bits} seed={request.seed}")
    return OutputRecord(
        command="simulate",
        parameters=request.model_dump(),
        results=simulate_results(
            config, scheme, request.file_bits, request.seed, request.demands, transcripts=request.transcripts
        ),
        seed=request.seed,
    )
