import numpy as np
import pytest

from app.errors import DomainError, InvalidShare
from app.models.network import NetworkConfig, validate
from app.models.region import SchemeId, SchemeKind
from app.services.rate_service import (
    mau_rate, rate_for, rate_generalized, rate_hybrid, rate_sc, rate_scheme_a, rate_scheme_b,
)


def _random_configs(count, seed=5):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 40))
        out.append(validate(NetworkConfig(
            library_size=n,
            helper_count=int(rng.integers(2, 6)),
            users_per_helper=int(rng.integers(2, 6)),
            helper_memory=float(rng.uniform(0, n)),
            user_memory=float(rng.uniform(0, n)),
        )))
    return out


def test_mau_rate_limits():
    assert mau_rate(0, 10, 4) == 4.0
    assert mau_rate(10, 10, 4) == 0.0
    # q = 1/2, k = 2: 1 * (1 - 1/4)
    assert mau_rate(5, 10, 2) == pytest.approx(0.75)


def test_mau_rate_bounded_by_min_k_n_over_m():
    for m in np.linspace(0.1, 10, 25):
        assert 0.0 <= mau_rate(m, 10, 6) <= min(6, 10 / m) + 1e-12


def test_mau_rate_domain():
    with pytest.raises(DomainError):
        mau_rate(11, 10, 2)
    with pytest.raises(DomainError):
        mau_rate(1, 10, 0)
    with pytest.raises(DomainError):
        mau_rate(0, 0, 2)


def test_closed_forms_at_comparison_point(fig3_config):
    sc = rate_sc(fig3_config)
    a = rate_scheme_a(fig3_config)
    assert sc.r1 == pytest.approx(4.284604, abs=1e-5)
    assert a.r1 == pytest.approx(7.141007, abs=1e-5)
    assert sc.r2 == pytest.approx(0.96, abs=1e-12)
    assert a.r2 == pytest.approx(0.96, abs=1e-12)
    assert rate_hybrid(fig3_config, 0.5, 0.5).r1 == pytest.approx(1.644527, abs=1e-5)
    assert rate_generalized(fig3_config, 0.5, 0.5).r1 == pytest.approx(2.240902, abs=1e-5)


def test_scheme_b_reports_both_first_layer_rates(fig3_config):
    pair, printed = rate_scheme_b(fig3_config)
    assert pair.r1 == pytest.approx(mau_rate(20, 50, 20))
    assert pair.r1 == pytest.approx(1.499945, abs=1e-5)
    assert pair.r2 == pytest.approx(0.96)
    assert printed == pytest.approx(rate_scheme_a(fig3_config).r1)


def test_sc_is_scheme_a_scaled_by_user_miss_fraction():
    for config in _random_configs(200):
        sc, a = rate_sc(config), rate_scheme_a(config)
        assert sc.r1 == pytest.approx((1 - config.m2 / config.n) * a.r1, rel=1e-12, abs=1e-15)
        assert sc.r2 == a.r2


def test_hybrid_corners():
    for config in _random_configs(50, seed=8):
        corner = rate_hybrid(config, 1.0, 1.0)
        assert corner.r1 == pytest.approx(rate_sc(config).r1, rel=1e-12, abs=1e-15)
        assert corner.r2 == rate_sc(config).r2
        b, _ = rate_scheme_b(config)
        corner = rate_hybrid(config, 0.0, 0.0)
        assert corner.r1 == pytest.approx(b.r1)
        assert corner.r2 == pytest.approx(b.r2)


def test_hybrid_never_worse_than_generalized():
    axis = np.linspace(0, 1, 11)
    for config in _random_configs(20, seed=13):
        for alpha in axis:
            for beta in axis:
                hybrid = rate_hybrid(config, alpha, beta)
                generalized = rate_generalized(config, alpha, beta)
                assert hybrid.r1 <= generalized.r1 + 1e-12
                assert hybrid.r2 == generalized.r2


def test_user_cache_split_factor_clamped(fig3_config):
    # M1 = 10 < alpha * N = 15 but beta * M2 = 20 > 15: the subsystem-1 first layer is 0, not negative
    pair = rate_hybrid(fig3_config, 0.3, 1.0)
    assert pair.r1 == pytest.approx(0.7 * mau_rate(0.0, 35.0, 20))
    assert pair.r1 == pytest.approx(14.0)


def test_share_outside_unit_interval_rejected(fig3_config):
    with pytest.raises(InvalidShare):
        rate_hybrid(fig3_config, 1.5, 0.5)
    with pytest.raises(InvalidShare):
        rate_generalized(fig3_config, 0.5, -0.1)
    with pytest.raises(InvalidShare):
        SchemeId(kind=SchemeKind.HYBRID, alpha=0.5)


def test_rate_for_dispatch(fig3_config):
    assert rate_for(fig3_config, SchemeId(kind=SchemeKind.SC)) == rate_sc(fig3_config)
    assert rate_for(fig3_config, SchemeId(kind=SchemeKind.B)) == rate_scheme_b(fig3_config)[0]
    assert rate_for(fig3_config, SchemeId.generalized(0.5, 0.5)) == rate_generalized(fig3_config, 0.5, 0.5)
    assert str(SchemeId.hybrid(0.5, 0.25)) == "hybrid(0.5,0.25)"


# ========== Continuity in the shares ==========

def _largest_step(values):
    return float(np.max(np.abs(np.diff(values))))


@pytest.mark.parametrize(
    "fields", [(50, 10, 2, 10.0, 20.0), (20, 2, 2, 0.0, 0.0), (20, 2, 2, 19.0, 0.5), (8, 2, 2, 2.0, 2.0)]
)
@pytest.mark.parametrize("rate", [rate_hybrid, rate_generalized])
def test_shared_rates_have_no_jumps(fields, rate):
    n, k1, k2, m1, m2 = fields
    config = validate(NetworkConfig(
        library_size=n, helper_count=k1, users_per_helper=k2, helper_memory=m1, user_memory=m2
    ))

    def line(points, fixed, along_alpha):
        shares = np.linspace(0.0, 1.0, points)
        pairs = [rate(config, s, fixed) if along_alpha else rate(config, fixed, s) for s in shares]
        return np.array([[p.r1, p.r2] for p in pairs])

    for fixed in (0.0, 0.3, 0.7, 1.0):
        for along_alpha in (True, False):
            coarse = line(101, fixed, along_alpha)
            fine = line(1601, fixed, along_alpha)
            for column in (0, 1):
                # a Lipschitz curve shrinks its largest step with the grid spacing; a jump does not
                assert _largest_step(fine[:, column]) <= _largest_step(coarse[:, column]) / 4 + 1e-12
