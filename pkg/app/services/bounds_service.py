"""
Bounds Service - cut-set lower bounds, tuple-based upper bounds and case classification

Lower bounds are exact integer-grid maximizations. Upper bounds evaluate the
hybrid scheme at the regime's candidate (alpha, beta) tuples and check the
chosen rate against the closed-form envelopes.
"""
import math
from typing import Dict, List, Tuple

from loguru import logger

from app.config import settings
from app.errors import EnvelopeViolation, InvariantViolation
from app.models.bounds import BoundSet, Regime, RegimeLabel, SubRegime, TupleEvaluation
from app.models.network import RatePair, ValidatedConfig, require_validated
from app.services.rate_service import rate_hybrid


def _ratio(num: float, den: float) -> float:
    """num / den with den = 0 read as a limit: inf for num > 0, 0 for num = 0."""
    if den == 0:
        return math.inf if num > 0 else 0.0
    return num / den


# ========== Lower bounds ==========

def cut_set_r1(config: ValidatedConfig, s1: int, s2: int) -> float:
    n, m1, m2 = config.n, config.m1, config.m2
    return s1 * s2 * (n - s1 * m1 - s1 * s2 * m2) / (n + s1 * s2)


def cut_set_r2(config: ValidatedConfig, t: int) -> float:
    return t * (config.n - t * config.m2) / (config.n + t)


def lower_bound_r1(config: ValidatedConfig) -> Tuple[float, int, int]:
    """
    Max over s1 in [1..K1], s2 in [1..K2] of the server cut-set expression.

    Ties keep the first pair in (s1, s2) scan order. A negative maximum is
    floored at 0; the witness of the raw maximum is still returned.
    """
    config = require_validated(config)
    best, best_s1, best_s2 = -math.inf, 1, 1
    for s1 in range(1, config.k1 + 1):
        for s2 in range(1, config.k2 + 1):
            value = cut_set_r1(config, s1, s2)
            if value > best:
                best, best_s1, best_s2 = value, s1, s2
    return max(0.0, best), best_s1, best_s2


def lower_bound_r2(config: ValidatedConfig) -> Tuple[float, int]:
    config = require_validated(config)
    best, best_t = -math.inf, 1
    for t in range(1, config.k2 + 1):
        value = cut_set_r2(config, t)
        if value > best:
            best, best_t = value, t
    return max(0.0, best), best_t


def lower_bound_oracle(n: int, k1: int, k2: int, m1: float, m2: float) -> Tuple[float, float]:
    """
    Brute-force maximizer over the raw parameters, kept apart from
    lower_bound_r1/r2 so the two can be cross-checked.
    """
    candidates_r1 = [
        (a * b) * (n - a * m1 - a * b * m2) / (n + a * b)
        for a in range(1, k1 + 1)
        for b in range(1, k2 + 1)
    ]
    candidates_r2 = [t * (n - t * m2) / (n + t) for t in range(1, k2 + 1)]
    return max(max(candidates_r1), 0.0), max(max(candidates_r2), 0.0)


# ========== Classification ==========

def _within(x: float, lo: float, hi: float, tol: float) -> bool:
    return lo - tol <= x <= hi + tol


def regime_of(config: ValidatedConfig) -> Regime:
    """Boundary M1 + K2*M2 = N belongs to Regime II."""
    return Regime.I if config.m1 + config.k2 * config.m2 < config.n else Regime.II


def subregime_of(config: ValidatedConfig) -> SubRegime:
    return SubRegime.I if config.m1 < config.n / 2 else SubRegime.II


def case_table(config: ValidatedConfig) -> Dict[Tuple[Regime, SubRegime], List[Tuple[str, float, float, float, float]]]:
    """(case, M1 low, M1 high, M2 low, M2 high) per sub-region, closed intervals, listing order."""
    n, k1, k2, m1 = config.n, config.k1, config.k2, config.m1
    rest = n - m1
    return {
        (Regime.I, SubRegime.I): [
            ("A", 0.0, n / (2 * k1), 0.0, n / (k1 * k2)),
            ("B", 0.0, n / (2 * k1), n / (k1 * k2), n / (2 * k2)),
            ("C", 0.0, n / (2 * k1), n / (2 * k2), n / 2),
            ("D", n / (2 * k1), n / 4, 0.0, n / (4 * k2)),
            ("E", n / (2 * k1), n / 4, n / (4 * k2), n / 2),
            ("F", n / 4, n / 2, 0.0, rest / (2 * k2)),
            ("G", n / 4, n / 2, rest / (2 * k2), rest / k2),
        ],
        (Regime.I, SubRegime.II): [
            ("A", n / 2, n, 0.0, rest / (2 * k2)),
            ("B", n / 2, n, rest / (2 * k2), rest / k2),
        ],
        (Regime.II, SubRegime.I): [
            ("A", 0.0, n / (2 * k1), n / (2 * k2), n / 2),
            ("B", 0.0, n / (2 * k1), n / 2, n),
            ("C", n / (2 * k1), n / 4, n / (4 * k2), n / 2),
            ("D", n / (2 * k1), n / 4, n / 2, n),
            ("E", n / 4, n / 2, rest / k2, rest / 2),
            ("F", n / 4, n / 2, rest / 2, n),
        ],
        (Regime.II, SubRegime.II): [
            ("A", n / 2, n, rest / k2, rest / 2),
            ("B", n / 2, n, rest / 2, n),
        ],
    }


def classify(config: ValidatedConfig, tol: float = None) -> RegimeLabel:
    """
    Regime, sub-regime and case of (M1, M2).

    Every matching case is listed; the label carries the last one in listing
    order, so shared boundaries go to the later case.
    """
    config = require_validated(config)
    tol = settings.bound_tolerance if tol is None else tol
    regime, sub = regime_of(config), subregime_of(config)
    matches = [
        case
        for case, m1_lo, m1_hi, m2_lo, m2_hi in case_table(config)[(regime, sub)]
        if _within(config.m1, m1_lo, m1_hi, tol) and _within(config.m2, m2_lo, m2_hi, tol)
    ]
    if not matches:
        raise InvariantViolation(
            f"no case predicate holds at (M1={config.m1}, M2={config.m2}) in regime {regime.value}.{sub.value}"
        )
    return RegimeLabel(regime=regime, subregime=sub, case=matches[-1], matching_cases=matches)


# ========== Upper bounds ==========

def envelopes(config: ValidatedConfig) -> Tuple[float, float]:
    """
    Closed-form (r1_ub, r2_ub) of the point's regime.

    Nonincreasing in M1 and M2 within a regime. The regime II expressions do
    not continue the regime I ones, so r1_ub can rise across M1 + K2*M2 = N.
    """
    n, k1, k2, m1, m2 = config.n, config.k1, config.k2, config.m1, config.m2
    server_only = _ratio(n, m2) * (1.0 - m2 / n)
    helper_cap = min(k2, _ratio(n, m2))
    if regime_of(config) is Regime.I:
        r1 = min(
            k1 * k2,
            server_only,
            _ratio(n * k2, m1 + m2 * k2),
            _ratio(k2 * n, m1) * (1.0 - m1 / n),
        )
        return r1, helper_cap
    r1 = min(k1 * k2, server_only, _ratio(2.0 * (n - m1) ** 2, n * m2))
    return r1, 2.0 * helper_cap


def candidate_tuples(config: ValidatedConfig) -> List[Tuple[str, float, float, float, float]]:
    """(name, alpha, beta, r1 bound, r2 bound) for every tuple of the point's regime, listing order."""
    n, k1, k2, m1, m2 = config.n, config.k1, config.k2, config.m1, config.m2
    share = m1 / n
    helper_cap = min(k2, _ratio(n, m2))
    server_only = min(k1 * k2, _ratio(n, m2) * (1.0 - m2 / n))
    if regime_of(config) is Regime.I:
        total = m1 + k2 * m2
        return [
            ("I", share, share, server_only, helper_cap),
            ("II", m1 / total if total > 0 else 0.0, 0.0, min(k1 * k2, _ratio(n * k2, total)), helper_cap),
            ("III", 1.0, 1.0, min(k1 * k2, _ratio(k2 * n, m1) * (1.0 - m1 / n)), helper_cap),
        ]
    return [
        ("I", share, share, server_only, helper_cap),
        ("II", share, 0.5, min(k1 * k2, _ratio(2.0 * (n - m1) ** 2, n * m2)), 2.0 * helper_cap),
    ]


def evaluate_tuples(config: ValidatedConfig, tol: float = None) -> List[TupleEvaluation]:
    """Hybrid rates at every candidate tuple with a pass flag against the tuple's own bound."""
    config = require_validated(config)
    tol = settings.envelope_tolerance if tol is None else tol
    out = []
    for name, alpha, beta, r1_bound, r2_bound in candidate_tuples(config):
        rates = rate_hybrid(config, alpha, beta)
        out.append(TupleEvaluation(
            name=name,
            alpha=alpha,
            beta=beta,
            rates=rates,
            r1_bound=r1_bound,
            r2_bound=r2_bound,
            within=rates.r1 <= r1_bound + tol and rates.r2 <= r2_bound + tol,
        ))
    return out


def upper_bounds(config: ValidatedConfig, strict: bool = True, tol: float = None) -> BoundSet:
    """
    Full bound set at one memory point.

    Picks the tuple with minimum hybrid r1 (ties to the first listed) and
    checks its rates against the envelopes. With strict=True a breach raises
    EnvelopeViolation; otherwise it is recorded in `envelope_ok`.
    """
    config = require_validated(config)
    tol = settings.envelope_tolerance if tol is None else tol

    tuples = evaluate_tuples(config, tol=tol)
    chosen = tuples[0]
    for candidate in tuples[1:]:
        if candidate.rates.r1 < chosen.rates.r1:
            chosen = candidate

    r1_ub, r2_ub = envelopes(config)
    r1_lb, s1, s2 = lower_bound_r1(config)
    r2_lb, t = lower_bound_r2(config)

    breaches = [
        (label, value, bound)
        for label, value, bound in (("r1", chosen.rates.r1, r1_ub), ("r2", chosen.rates.r2, r2_ub))
        if value > bound + tol
    ]
    if breaches and strict:
        label, value, bound = breaches[0]
        logger.error(f"Envelope breach {label}={value} > {bound} at M1={config.m1}, M2={config.m2}")
        raise EnvelopeViolation(label, value, bound, config.m1, config.m2)

    return BoundSet(
        r1_lb=r1_lb,
        r2_lb=r2_lb,
        r1_ub=r1_ub,
        r2_ub=r2_ub,
        alpha_star=chosen.alpha,
        beta_star=chosen.beta,
        s1=s1,
        s2=s2,
        t=t,
        hybrid=RatePair(r1=chosen.rates.r1, r2=chosen.rates.r2),
        envelope_ok=not breaches,
        tuples=tuples,
        chosen_tuple=chosen.name,
    )
