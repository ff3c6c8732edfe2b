"""
Gap Service - order-optimality certification at single points and over sweeps

Check failures are recorded in the reports, never raised. Only an
ineligible topology is an error.
"""
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import pandas as pd
from loguru import logger

from app.config import settings
from app.errors import NotGapEligible
from app.models.bounds import Regime, RegimeLabel, SubRegime
from app.models.gap import GapReport, InequalityCheck, R2_NOTE, SweepResult, SweepSummary, WitnessCheck
from app.models.network import NetworkConfig, ValidatedConfig, require_validated, validate
from app.services.bounds_service import classify, cut_set_r1, cut_set_r2, upper_bounds

THEOREM_R1 = (1 / 48, 4.0)
THEOREM_R2 = (1 / 20, 4.0)
THEOREM_R2_STATED = (1 / 48, 4.0)

# (regime, subregime, case) -> (c_mult, c_add) for r1_lb >= c_mult * r1_ub - c_add
CASE_CONSTANTS: Dict[Tuple[Regime, SubRegime, str], Tuple[float, float]] = {
    (Regime.I, SubRegime.I, "A"): (1 / 24, 0.0),
    (Regime.I, SubRegime.I, "B"): (1 / 24, 0.0),
    (Regime.I, SubRegime.I, "C"): (1 / 24, 0.0),
    (Regime.I, SubRegime.I, "D"): (1 / 16, 0.0),
    (Regime.I, SubRegime.I, "E"): (1 / 48, 0.0),
    (Regime.I, SubRegime.I, "F"): (1 / 12, 0.0),
    (Regime.I, SubRegime.I, "G"): (1 / 48, 0.0),
    (Regime.I, SubRegime.II, "A"): (1 / 6, 0.0),
    (Regime.I, SubRegime.II, "B"): (1 / 24, 0.0),
    (Regime.II, SubRegime.I, "A"): (1 / 24, 0.0),
    (Regime.II, SubRegime.I, "B"): (1.0, 1.0),
    (Regime.II, SubRegime.I, "C"): (1 / 48, 0.0),
    (Regime.II, SubRegime.I, "D"): (1.0, 1.0),
    (Regime.II, SubRegime.I, "E"): (1 / 20, 0.0),
    (Regime.II, SubRegime.I, "F"): (1.0, 4.0),
    (Regime.II, SubRegime.II, "A"): (1 / 20, 0.0),
    (Regime.II, SubRegime.II, "B"): (1.0, 4.0),
}

R2_CASE_A = (1 / 20, 0.0)
R2_CASE_B = (1.0, 4.0)

CSV_COLUMNS = [
    "m1", "m2", "regime", "subregime", "case", "boundary", "alpha_star", "beta_star",
    "r1_lb", "r1_ub", "r2_lb", "r2_ub", "s1", "s2", "t",
    "theorem1_r1_slack", "theorem1_r1_pass", "theorem1_r2_slack", "theorem1_r2_pass",
    "case_r1_c_mult", "case_r1_c_add", "case_r1_slack", "case_r1_pass",
    "case_r2_slack", "case_r2_pass", "envelope_pass",
]


def case_constants(label: RegimeLabel, case: Optional[str] = None) -> Tuple[float, float]:
    return CASE_CONSTANTS[(label.regime, label.subregime, case or label.case)]


def r2_constants(config: ValidatedConfig) -> Tuple[float, float]:
    return R2_CASE_A if config.m2 < config.n / 2 else R2_CASE_B


def _inequality(
    name: str, lhs: float, rhs: float, constants: Tuple[float, float], tol: float, informational: bool = False
) -> InequalityCheck:
    c_mult, c_add = constants
    slack = lhs - (c_mult * rhs - c_add)
    return InequalityCheck(
        name=name,
        c_mult=c_mult,
        c_add=c_add,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        passed=slack >= -tol,
        informational=informational,
    )


# ========== Constructive witnesses ==========

def _floor_div(num: float, den: float) -> Optional[int]:
    if den <= 0:
        return None
    return int(math.floor(num / den))


def case_witness(config: ValidatedConfig, label: RegimeLabel, case: Optional[str] = None) -> Optional[Tuple[int, int]]:
    """
    The fixed (s1, s2) each case's derivation plugs into the server cut-set
    expression. None for cases argued additively, or when the choice is
    undefined at this point (a zero denominator).
    """
    n, k1, k2, m1, m2 = config.n, config.k1, config.k2, config.m1, config.m2
    case = case or label.case
    rest = n - m1

    def split_choice() -> Tuple[Optional[int], Optional[int]]:
        if m1 >= m2:
            return _floor_div(n, 4 * m1), _floor_div(m1, m2)
        return _floor_div(n, 4 * m2), 1

    key = (label.regime, label.subregime, case)
    choices = {
        (Regime.I, SubRegime.I, "A"): lambda: (k1 // 2, k2),
        (Regime.I, SubRegime.I, "B"): lambda: (_floor_div(n, 2 * m2 * k2), k2),
        (Regime.I, SubRegime.I, "C"): lambda: (1, _floor_div(n, 2 * m2)),
        (Regime.I, SubRegime.I, "D"): lambda: (_floor_div(n, 2 * (m1 + m2 * k2)), k2),
        (Regime.I, SubRegime.I, "E"): split_choice,
        (Regime.I, SubRegime.I, "F"): lambda: (1, k2),
        (Regime.I, SubRegime.I, "G"): lambda: (1, _floor_div(rest, 2 * m2)),
        (Regime.I, SubRegime.II, "A"): lambda: (1, k2),
        (Regime.I, SubRegime.II, "B"): lambda: (1, _floor_div(rest, 2 * m2)),
        (Regime.II, SubRegime.I, "A"): lambda: (1, _floor_div(n, 2 * m2)),
        (Regime.II, SubRegime.I, "C"): split_choice,
        (Regime.II, SubRegime.I, "E"): lambda: (1, _floor_div(rest, 2 * m2)),
        (Regime.II, SubRegime.II, "A"): lambda: (1, _floor_div(rest, 2 * m2)),
    }
    if key not in choices:
        return None
    s1, s2 = choices[key]()
    if s1 is None or s2 is None:
        return None
    return s1, s2


def witness_checks(config: ValidatedConfig, report_label: RegimeLabel, r1_lb: float, r2_lb: float, tol: float) -> List[WitnessCheck]:
    out = []
    for case in report_label.matching_cases:
        pair = case_witness(config, report_label, case)
        if pair is None:
            continue
        s1, s2 = pair
        valid = 1 <= s1 <= config.k1 and 1 <= s2 <= config.k2
        value = cut_set_r1(config, s1, s2) if valid else None
        out.append(WitnessCheck(
            case=case, s1=s1, s2=s2, valid=valid, value=value,
            dominated=value is None or r1_lb >= value - tol,
        ))

    if config.m2 < config.n / 2:
        cap = config.k2 if config.m2 == 0 else min(config.k2, config.n / config.m2)
        t = int(math.floor(cap / 2))
        valid = 1 <= t <= config.k2
        value = cut_set_r2(config, t) if valid else None
        out.append(WitnessCheck(
            case="R2.A", t=t, valid=valid, value=value,
            dominated=value is None or r2_lb >= value - tol,
        ))
    return out


# ========== Point check ==========

def check_point(config: ValidatedConfig, tol: float = None) -> GapReport:
    """
    Bounds, case label and every applicable inequality at one memory point.

    On case boundaries the r1 inequality of every matching case is evaluated
    and reported as informational.
    """
    config = require_validated(config)
    if not config.gap_eligible:
        raise NotGapEligible(
            f"gap checks need N >= K1*K2 (N={config.n}, K1*K2={config.user_count})",
            n=config.n,
            k1=config.k1,
            k2=config.k2,
        )
    tol = settings.gap_tolerance if tol is None else tol

    label = classify(config)
    bounds = upper_bounds(config, strict=False)

    checks = [
        _inequality("theorem1_r1", bounds.r1_lb, bounds.r1_ub, THEOREM_R1, tol),
        _inequality("theorem1_r2", bounds.r2_lb, bounds.r2_ub, THEOREM_R2, tol),
        _inequality("theorem1_r2_stated", bounds.r2_lb, bounds.r2_ub, THEOREM_R2_STATED, tol),
    ]
    for case in label.matching_cases:
        checks.append(_inequality(
            f"case_r1[{case}]" if label.boundary else "case_r1",
            bounds.r1_lb,
            bounds.r1_ub,
            case_constants(label, case),
            tol,
            informational=label.boundary,
        ))
    checks.append(_inequality("case_r2", bounds.r2_lb, bounds.r2_ub, r2_constants(config), tol))

    report = GapReport(
        library_size=config.n,
        helper_count=config.k1,
        users_per_helper=config.k2,
        helper_memory=config.m1,
        user_memory=config.m2,
        label=label,
        bounds=bounds,
        case_constants=case_constants(label),
        checks=checks,
        witnesses=witness_checks(config, label, bounds.r1_lb, bounds.r2_lb, tol),
    )

    if not report.passed:
        failed = [c.name for c in checks if not c.passed and not c.informational]
        logger.warning(
            f"Gap check failed at M1={config.m1}, M2={config.m2} ({label.key}): {failed or ['envelope']}"
        )
    else:
        logger.debug(f"Gap point M1={config.m1}, M2={config.m2} {label.key} ok")
    return report


# ========== Sweeps ==========

def grid_axis(n: int, resolution: int) -> List[float]:
    """resolution evenly spaced memories over [0, N]; a single point is 0."""
    if resolution <= 1:
        return [0.0]
    return [n * step / (resolution - 1) for step in range(resolution)]


def sweep(
    template: NetworkConfig,
    grid: int,
    regime: Optional[Regime] = None,
    case: Optional[str] = None,
    threads: Optional[int] = None,
    tol: float = None,
) -> SweepResult:
    """
    check_point over the M1 x M2 grid, M1-major.

    `regime` and `case` restrict the reported points. Result order follows the
    grid regardless of thread count.
    """
    base = validate(template)
    if not base.gap_eligible:
        raise NotGapEligible(f"gap sweep needs N >= K1*K2 (N={base.n}, K1*K2={base.user_count})")

    axis = grid_axis(base.n, grid)
    configs = [validate(base.with_memories(m1, m2)) for m1 in axis for m2 in axis]
    if regime is not None or case is not None:
        configs = [
            c for c in configs
            if _matches_filter(classify(c), regime, case)
        ]

    workers = max(1, threads or settings.threads)
    logger.info(f"Gap sweep N={base.n} K1={base.k1} K2={base.k2} grid={grid} points={len(configs)} threads={workers}")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(pool.map(lambda c: check_point(c, tol=tol), configs))

    summary = summarize(reports)
    logger.info(
        f"Sweep done: {summary.points} points, theorem failures={summary.theorem_failures}, "
        f"case failures={summary.case_failures}, envelope failures={summary.envelope_failures}"
    )
    return SweepResult(reports=reports, summary=summary)


def _matches_filter(label: RegimeLabel, regime: Optional[Regime], case: Optional[str]) -> bool:
    if regime is not None and label.regime is not regime:
        return False
    if case is not None and case not in (label.case, label.key):
        return False
    return True


def summarize(reports: List[GapReport]) -> SweepSummary:
    min_slack: Dict[str, float] = {}
    worst: Dict[str, Tuple[float, float]] = {}
    failures: List[Tuple[float, float, str]] = []
    theorem_failures = case_failures = envelope_failures = witness_failures = 0

    for report in reports:
        point = (report.helper_memory, report.user_memory)
        for check in report.checks:
            if check.informational:
                continue
            if check.name not in min_slack or check.slack < min_slack[check.name]:
                min_slack[check.name] = check.slack
                worst[check.name] = point
            if not check.passed:
                failures.append((point[0], point[1], check.name))
                if check.name.startswith("theorem1"):
                    theorem_failures += 1
                else:
                    case_failures += 1
        if not report.bounds.envelope_ok:
            envelope_failures += 1
            failures.append((point[0], point[1], "envelope"))
        witness_failures += sum(1 for w in report.witnesses if not w.dominated)

    return SweepSummary(
        points=len(reports),
        theorem_failures=theorem_failures,
        case_failures=case_failures,
        envelope_failures=envelope_failures,
        witness_failures=witness_failures,
        min_slack=min_slack,
        worst_point=worst,
        failures=failures,
    )


# ========== Serialization ==========

def report_row(report: GapReport) -> dict:
    bounds, label = report.bounds, report.label
    theorem_r1 = report.check("theorem1_r1")
    theorem_r2 = report.check("theorem1_r2")
    case_r1 = report.check("case_r1") or report.check(f"case_r1[{label.case}]")
    case_r2 = report.check("case_r2")
    return {
        "m1": report.helper_memory,
        "m2": report.user_memory,
        "regime": label.regime.value,
        "subregime": label.subregime.value,
        "case": label.case,
        "boundary": label.boundary,
        "alpha_star": bounds.alpha_star,
        "beta_star": bounds.beta_star,
        "r1_lb": bounds.r1_lb,
        "r1_ub": bounds.r1_ub,
        "r2_lb": bounds.r2_lb,
        "r2_ub": bounds.r2_ub,
        "s1": bounds.s1,
        "s2": bounds.s2,
        "t": bounds.t,
        "theorem1_r1_slack": theorem_r1.slack,
        "theorem1_r1_pass": theorem_r1.passed,
        "theorem1_r2_slack": theorem_r2.slack,
        "theorem1_r2_pass": theorem_r2.passed,
        "case_r1_c_mult": case_r1.c_mult,
        "case_r1_c_add": case_r1.c_add,
        "case_r1_slack": case_r1.slack,
        "case_r1_pass": case_r1.passed,
        "case_r2_slack": case_r2.slack,
        "case_r2_pass": case_r2.passed,
        "envelope_pass": bounds.envelope_ok,
    }


def reports_frame(reports: List[GapReport]) -> pd.DataFrame:
    return pd.DataFrame([report_row(r) for r in reports], columns=CSV_COLUMNS)


def sweep_csv(result: SweepResult) -> str:
    """One row per grid point under a comment header carrying the r2 note."""
    buffer = io.StringIO()
    buffer.write(f"# {R2_NOTE}\n")
    reports_frame(result.reports).to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def sweep_json(result: SweepResult) -> str:
    return json.dumps(result.model_dump(mode="json"), sort_keys=True)
