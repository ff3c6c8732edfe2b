"""
Output records shared by the CLI and the HTTP API

Every command result is wrapped in the same envelope (command, parameters,
results, version, seed) so the two front ends emit identical payloads.
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from app import __version__
from app.errors import ConfigError
from app.models.network import NetworkConfig, SimulationConfig, ValidatedConfig, validate, validate_simulation
from app.models.region import SchemeId, SchemeKind
from app.services import bounds_service, delivery_service, gap_service, rate_service, region_service
from app.services.simulation_service import parse_demands, run_simulation, simulation_service


class NetworkParams(BaseModel):
    """(N, K1, K2, M1, M2) as the front ends accept them."""

    n: int = Field(..., description="Library size N")
    k1: int = Field(..., description="Helpers K1")
    k2: int = Field(..., description="Users per helper K2")
    m1: float = Field(0.0, description="Helper memory M1, in files")
    m2: float = Field(0.0, description="User memory M2, in files")

    def to_config(self) -> ValidatedConfig:
        return validate(NetworkConfig(
            library_size=self.n,
            helper_count=self.k1,
            users_per_helper=self.k2,
            helper_memory=self.m1,
            user_memory=self.m2,
        ))


class OutputRecord(BaseModel):
    command: str
    parameters: Dict[str, Any]
    results: Any
    version: str = __version__
    seed: Optional[int] = None


def scheme_id(name: str, alpha: Optional[float] = None, beta: Optional[float] = None) -> SchemeId:
    try:
        kind = SchemeKind(name.lower())
    except ValueError:
        raise ConfigError(f"unknown scheme {name!r}; expected one of {[k.value for k in SchemeKind]}")
    if kind.parametrized:
        return SchemeId(kind=kind, alpha=alpha, beta=beta)
    return SchemeId(kind=kind)


# ========== Result payloads ==========

def rates_results(config: ValidatedConfig, scheme: SchemeId) -> Dict[str, Any]:
    pair = rate_service.rate_for(config, scheme)
    results: Dict[str, Any] = {"scheme": str(scheme), "r1": pair.r1, "r2": pair.r2}
    if scheme.kind is SchemeKind.B:
        results["printed_r1"] = rate_service.rate_scheme_b(config)[1]
    return results


def simulate_results(
    config: ValidatedConfig,
    scheme: SchemeId,
    file_bits: int,
    seed: int,
    demands: Any = None,
    transcripts: bool = False,
) -> Dict[str, Any]:
    sim = validate_simulation(config, SimulationConfig(
        file_bits=file_bits,
        seed=seed,
        request_profile=tuple(parse_demands(config, demands, seed)),
    ))
    if not transcripts:
        return run_simulation(config, sim, scheme).model_dump(mode="json")
    outcome = simulation_service.deliver(config, sim, scheme)
    results = simulation_service.report(config, sim, scheme, outcome).model_dump(mode="json")
    results["transcripts"] = delivery_service.dump_transcripts(outcome)
    return results


def bounds_results(config: ValidatedConfig) -> Dict[str, Any]:
    label = bounds_service.classify(config)
    bounds = bounds_service.upper_bounds(config)
    return {
        "label": {**label.model_dump(mode="json"), "boundary": label.boundary},
        "bounds": bounds.model_dump(mode="json"),
    }


def gap_point_results(config: ValidatedConfig) -> Dict[str, Any]:
    report = gap_service.check_point(config)
    return {
        **report.model_dump(mode="json"),
        "passed": report.passed,
        "theorem_passed": report.theorem_passed,
        "note": gap_service.R2_NOTE,
    }


def gap_sweep_results(template: NetworkConfig, grid: int, threads: Optional[int] = None, rows: bool = True) -> Dict[str, Any]:
    result = gap_service.sweep(template, grid, threads=threads)
    payload: Dict[str, Any] = {"summary": {**result.summary.model_dump(mode="json"), "passed": result.summary.passed}}
    if rows:
        payload["rows"] = [gap_service.report_row(r) for r in result.reports]
    return payload


def frontier_results(config: ValidatedConfig, scheme: SchemeKind, resolution: int, threads: Optional[int] = None) -> Dict[str, Any]:
    return region_service.frontier(config, scheme, resolution, threads=threads).model_dump(mode="json")


def compare_results(config: ValidatedConfig, resolution: int, threads: Optional[int] = None) -> Dict[str, Any]:
    hybrid = region_service.frontier(config, SchemeKind.HYBRID, resolution, threads=threads)
    generalized = region_service.frontier(config, SchemeKind.GENERALIZED, resolution, threads=threads)
    forward = region_service.dominates(hybrid, generalized)
    backward = region_service.dominates(generalized, hybrid)
    return {
        "hybrid_dominates_generalized": forward.model_dump(mode="json"),
        "generalized_dominates_hybrid": backward.model_dump(mode="json"),
        "frontiers": [hybrid.model_dump(mode="json"), generalized.model_dump(mode="json")],
    }


def fig3_results(config: ValidatedConfig, axis: str, fixed: float, values: Optional[List[float]] = None) -> Dict[str, Any]:
    kwargs = {"values": values} if values else {}
    rows = region_service.fig3_table(config, axis=axis, fixed=fixed, **kwargs)
    return {"axis": axis, "fixed": fixed, "rows": [row.model_dump(mode="json") for row in rows]}
