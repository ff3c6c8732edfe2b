"""
Rate Service - closed-form delivery rates for every scheme

All functions are pure real arithmetic in file units (F never appears).
Degenerate denominators are handled by their limits, never by epsilon
perturbation.
"""
from typing import Tuple

from app.errors import DomainError, InvalidShare
from app.models.network import RatePair, ValidatedConfig, require_validated
from app.models.region import SchemeId, SchemeKind


def mau_rate(m: float, n: float, k: int) -> float:
    """
    Decentralized single-layer rate (1 - m/n)(n/m)(1 - (1 - m/n)^k).

    Limits: m = 0 gives k, m = n gives 0. Result lies in [0, min(k, n/m)].
    """
    if n <= 0 or k < 1 or not (0.0 <= m <= n):
        raise DomainError(f"mau_rate undefined for m={m}, n={n}, k={k}", m=m, n=n, k=k)
    if m == 0:
        return float(k)
    q = m / n
    if q >= 1.0:
        return 0.0
    return max(0.0, (1.0 - q) / q * (1.0 - (1.0 - q) ** k))


def _subsystem_rate(memory: float, library: float, k: int) -> float:
    """mau_rate with the memory clamped to the (sub)library size; empty library gives 0."""
    if library <= 0:
        return 0.0
    return mau_rate(min(max(memory, 0.0), library), library, k)


def _check_share(alpha: float, beta: float) -> None:
    for label, value in (("alpha", alpha), ("beta", beta)):
        if not (0.0 <= value <= 1.0):
            raise InvalidShare(f"{label}={value} outside [0, 1]", field=label, value=value)


def rate_sc(config: ValidatedConfig) -> RatePair:
    """S&C scheme: first layer scaled by (1 - M2/N), second layer single-layer rate."""
    config = require_validated(config)
    n, k1, k2 = config.n, config.k1, config.k2
    r1 = k2 * (1.0 - config.m2 / n) * mau_rate(config.m1, n, k1)
    return RatePair(r1=max(0.0, r1), r2=mau_rate(config.m2, n, k2))


def rate_scheme_a(config: ValidatedConfig) -> RatePair:
    config = require_validated(config)
    return RatePair(
        r1=config.k2 * mau_rate(config.m1, config.n, config.k1),
        r2=mau_rate(config.m2, config.n, config.k2),
    )


def rate_scheme_b(config: ValidatedConfig) -> Tuple[RatePair, float]:
    """
    Scheme B (server codes across all K1*K2 users, helpers forward).

    Returns the hybrid-consistent pair and, separately, r1 as literally printed
    for scheme B, which duplicates scheme A's first-layer rate.
    """
    config = require_validated(config)
    primary = RatePair(
        r1=mau_rate(config.m2, config.n, config.user_count),
        r2=mau_rate(config.m2, config.n, config.k2),
    )
    printed_r1 = config.k2 * mau_rate(config.m1, config.n, config.k1)
    return primary, printed_r1


def _hybrid_terms(
    config: ValidatedConfig, alpha: float, beta: float, split_user_cache: bool
) -> RatePair:
    n, k1, k2, m1, m2 = config.n, config.k1, config.k2, config.m1, config.m2
    k = config.user_count

    # Subsystem 1: first alpha-fraction of every file, helpers hold M1, users beta*M2
    term1_r1 = 0.0
    term1_r2 = 0.0
    if alpha > 0:
        sub_library = alpha * n
        first_layer = alpha * k2 * _subsystem_rate(m1, sub_library, k1)
        if split_user_cache:
            first_layer *= max(0.0, 1.0 - beta * m2 / sub_library)
        term1_r1 = first_layer
        term1_r2 = alpha * _subsystem_rate(beta * m2, sub_library, k2)

    # Subsystem 2: remaining (1 - alpha)-fraction, no helper caching, users (1 - beta)*M2
    term2_r1 = 0.0
    term2_r2 = 0.0
    if alpha < 1:
        sub_library = (1.0 - alpha) * n
        user_share = (1.0 - beta) * m2
        term2_r1 = (1.0 - alpha) * _subsystem_rate(user_share, sub_library, k)
        term2_r2 = (1.0 - alpha) * _subsystem_rate(user_share, sub_library, k2)

    return RatePair(r1=term1_r1 + term2_r1, r2=term1_r2 + term2_r2)


def rate_hybrid(config: ValidatedConfig, alpha: float, beta: float) -> RatePair:
    """S&C on the alpha part, scheme B on the rest, user memory split beta : 1 - beta."""
    config = require_validated(config)
    _check_share(alpha, beta)
    return _hybrid_terms(config, alpha, beta, split_user_cache=True)


def rate_generalized(config: ValidatedConfig, alpha: float, beta: float) -> RatePair:
    """Memory sharing between schemes A and B: the hybrid rate without the user-cache split."""
    config = require_validated(config)
    _check_share(alpha, beta)
    return _hybrid_terms(config, alpha, beta, split_user_cache=False)


def rate_for(config: ValidatedConfig, scheme: SchemeId) -> RatePair:
    """Dispatch on a SchemeId."""
    if scheme.kind is SchemeKind.SC:
        return rate_sc(config)
    if scheme.kind is SchemeKind.A:
        return rate_scheme_a(config)
    if scheme.kind is SchemeKind.B:
        return rate_scheme_b(config)[0]
    if scheme.kind is SchemeKind.HYBRID:
        return rate_hybrid(config, scheme.alpha, scheme.beta)
    return rate_generalized(config, scheme.alpha, scheme.beta)
