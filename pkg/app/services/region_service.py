"""
Region Service - achievable-region frontiers and hybrid vs generalized comparison
"""
import io
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import pandas as pd
from loguru import logger

from app.config import settings
from app.errors import ConfigError
from app.models.network import ValidatedConfig, require_validated
from app.models.region import Dominance, Fig3Row, Frontier, FrontierPoint, SchemeKind
from app.services.rate_service import rate_generalized, rate_hybrid

FRONTIER_COLUMNS = ["alpha", "beta", "r1", "r2", "scheme"]
FIG3_COLUMNS = ["axis", "varied", "fixed", "r1_hybrid", "r1_generalized", "r2"]
FIG3_DEFAULT_VALUES = tuple(round(0.2 + 0.1 * step, 10) for step in range(8))

_RATE_FUNCTIONS = {
    SchemeKind.HYBRID: rate_hybrid,
    SchemeKind.GENERALIZED: rate_generalized,
}


def _rate_function(scheme: SchemeKind):
    try:
        return _RATE_FUNCTIONS[scheme]
    except KeyError:
        raise ConfigError(f"frontier needs a memory-shared scheme (hybrid or generalized), got {scheme.value}")


def share_axis(resolution: int) -> List[float]:
    return [step / (resolution - 1) for step in range(resolution)]


def grid_points(config: ValidatedConfig, scheme: SchemeKind, resolution: int, threads: Optional[int] = None) -> List[FrontierPoint]:
    """Every (alpha, beta) grid evaluation, alpha-major."""
    rate = _rate_function(scheme)
    axis = share_axis(resolution)

    def row(alpha: float) -> List[FrontierPoint]:
        out = []
        for beta in axis:
            pair = rate(config, alpha, beta)
            out.append(FrontierPoint(alpha=alpha, beta=beta, r1=pair.r1, r2=pair.r2))
        return out

    with ThreadPoolExecutor(max_workers=max(1, threads or settings.threads)) as pool:
        rows = list(pool.map(row, axis))
    return [point for points in rows for point in points]


def pareto_filter(points: Sequence[FrontierPoint]) -> List[FrontierPoint]:
    """
    Non-dominated subset sorted by r1 ascending.

    Equal rate pairs keep the lexicographically smallest (alpha, beta).
    """
    ordered = sorted(points, key=lambda p: (p.r1, p.r2, p.alpha, p.beta))
    kept: List[FrontierPoint] = []
    for point in ordered:
        if not kept or point.r2 < kept[-1].r2:
            kept.append(point)
    return kept


def frontier(
    config: ValidatedConfig,
    scheme: SchemeKind = SchemeKind.HYBRID,
    resolution: Optional[int] = None,
    threads: Optional[int] = None,
) -> Frontier:
    config = require_validated(config)
    resolution = resolution or settings.frontier_resolution
    if resolution < 2:
        raise ConfigError(f"frontier grid needs at least 2 points per axis, got {resolution}")

    points = pareto_filter(grid_points(config, scheme, resolution, threads=threads))
    logger.info(f"{scheme.value} frontier at resolution {resolution}: {len(points)} points")
    return Frontier(scheme=scheme, resolution=resolution, points=points)


def dominates(a: Frontier, b: Frontier, same_grid: bool = True) -> Dominance:
    """
    True iff every point of b is covered (r1 and r2 both <=) by some point of a.

    The witness is the first point of b, in r1 order, that nothing in a covers.
    With same_grid=False the frontiers may come from different resolutions,
    e.g. to check that refining a grid never loses ground.
    """
    if same_grid and a.resolution != b.resolution:
        raise ConfigError(f"frontiers on different grids ({a.resolution} vs {b.resolution})")
    for target in b.points:
        if not any(candidate.covers(target) for candidate in a.points):
            return Dominance(dominates=False, witness=target)
    return Dominance(dominates=True)


def fig3_table(
    config: ValidatedConfig,
    axis: str = "alpha",
    fixed: float = 0.5,
    values: Sequence[float] = FIG3_DEFAULT_VALUES,
) -> List[Fig3Row]:
    """r1 of hybrid and generalized schemes as one share varies and the other is held fixed."""
    config = require_validated(config)
    if axis not in ("alpha", "beta"):
        raise ConfigError(f"fig3 axis must be 'alpha' or 'beta', got {axis!r}")

    rows = []
    for varied in values:
        alpha, beta = (varied, fixed) if axis == "alpha" else (fixed, varied)
        hybrid = rate_hybrid(config, alpha, beta)
        generalized = rate_generalized(config, alpha, beta)
        rows.append(Fig3Row(varied=varied, r1_hybrid=hybrid.r1, r1_generalized=generalized.r1, r2=hybrid.r2))
    return rows


# ========== CSV ==========

def frontier_frame(*frontiers: Frontier) -> pd.DataFrame:
    records = [
        {"alpha": p.alpha, "beta": p.beta, "r1": p.r1, "r2": p.r2, "scheme": f.scheme.value}
        for f in frontiers
        for p in f.points
    ]
    return pd.DataFrame(records, columns=FRONTIER_COLUMNS)


def fig3_frame(rows: List[Fig3Row], axis: str, fixed: float) -> pd.DataFrame:
    records = [
        {
            "axis": axis,
            "varied": row.varied,
            "fixed": fixed,
            "r1_hybrid": row.r1_hybrid,
            "r1_generalized": row.r1_generalized,
            "r2": row.r2,
        }
        for row in rows
    ]
    return pd.DataFrame(records, columns=FIG3_COLUMNS)


def to_csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()
