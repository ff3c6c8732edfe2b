import numpy as np
import pytest

from app.errors import EnvelopeViolation
from app.models.bounds import Regime, SubRegime
from app.models.network import NetworkConfig, validate
from app.services import bounds_service
from app.services.acceptance_service import SWEEP_TOPOLOGIES, random_configs
from app.services.bounds_service import (
    classify, envelopes, evaluate_tuples, lower_bound_oracle, lower_bound_r1, lower_bound_r2, regime_of, upper_bounds,
)
from app.services.gap_service import grid_axis
from app.services.rate_service import rate_hybrid


def _config(n, k1, k2, m1, m2):
    return validate(NetworkConfig(
        library_size=n, helper_count=k1, users_per_helper=k2, helper_memory=m1, user_memory=m2
    ))


def test_lower_bounds_at_comparison_point(fig3_config):
    r1, s1, s2 = lower_bound_r1(fig3_config)
    assert r1 == pytest.approx(20 / 51, abs=1e-12)
    assert (s1, s2) == (1, 1)
    r2, t = lower_bound_r2(fig3_config)
    assert r2 == pytest.approx(30 / 51, abs=1e-12)
    assert t == 1


def test_lower_bounds_floored_at_zero():
    config = _config(10, 3, 3, 10.0, 10.0)
    assert lower_bound_r1(config)[0] == 0.0
    assert lower_bound_r2(config)[0] == 0.0


def test_lower_bound_without_memory_is_cut_of_all_users():
    # s1 = K1, s2 = K2 with no caching: K1K2 * N / (N + K1K2)
    config = _config(40, 2, 3, 0.0, 0.0)
    r1, s1, s2 = lower_bound_r1(config)
    assert (s1, s2) == (2, 3)
    assert r1 == pytest.approx(6 * 40 / 46)


def test_scan_matches_independent_oracle():
    rng = np.random.default_rng(21)
    for _ in range(500):
        n = int(rng.integers(1, 50))
        config = _config(n, int(rng.integers(2, 8)), int(rng.integers(2, 8)), rng.uniform(0, n), rng.uniform(0, n))
        assert (lower_bound_r1(config)[0], lower_bound_r2(config)[0]) == lower_bound_oracle(
            config.n, config.k1, config.k2, config.m1, config.m2
        )


def test_classify_comparison_point(fig3_config):
    label = classify(fig3_config)
    assert label.regime is Regime.II
    assert label.subregime is SubRegime.I
    assert label.case == "C"
    assert label.key == "II.I.C"
    assert not label.boundary


def test_regime_boundary_belongs_to_regime_two():
    # M1 + K2*M2 == N
    assert classify(_config(20, 2, 2, 4.0, 8.0)).regime is Regime.II
    assert classify(_config(20, 2, 2, 4.0, 7.9)).regime is Regime.I


def test_shared_case_boundary_goes_to_later_case(fig3_config):
    label = classify(fig3_config.with_memories(12.5, 18.75))
    assert label.matching_cases == ["C", "E", "F"]
    assert label.case == "F"
    assert label.boundary


@pytest.mark.parametrize("topology", [(20, 2, 2), (36, 3, 3), (50, 10, 2)])
def test_every_grid_point_gets_a_case(topology):
    n, k1, k2 = topology
    axis = grid_axis(n, 21)
    for m1 in axis:
        for m2 in axis:
            label = classify(_config(n, k1, k2, m1, m2))
            assert label.case in label.matching_cases


def test_upper_bounds_at_comparison_point(fig3_config):
    bounds = upper_bounds(fig3_config)
    assert bounds.r1_ub == pytest.approx(1.5)
    assert bounds.r2_ub == pytest.approx(4.0)
    assert bounds.chosen_tuple == "I"
    assert (bounds.alpha_star, bounds.beta_star) == pytest.approx((0.2, 0.2))
    assert bounds.hybrid.r1 == pytest.approx(1.19996, abs=1e-5)
    assert bounds.hybrid.r2 == pytest.approx(0.96)
    assert bounds.envelope_ok
    assert bounds.r1_lb <= bounds.hybrid.r1 <= bounds.r1_ub


def test_chosen_tuple_minimizes_first_layer(fig3_config):
    bounds = upper_bounds(fig3_config)
    assert [t.name for t in bounds.tuples] == ["I", "II"]
    assert bounds.hybrid.r1 == min(t.rates.r1 for t in bounds.tuples)
    for item in evaluate_tuples(fig3_config):
        assert item.rates == rate_hybrid(fig3_config, item.alpha, item.beta)


def test_regime_one_has_three_tuples():
    config = _config(20, 2, 2, 2.0, 2.0)
    names = [t.name for t in evaluate_tuples(config)]
    assert names == ["I", "II", "III"]
    r1_ub, r2_ub = envelopes(config)
    bounds = upper_bounds(config)
    assert bounds.hybrid.r1 <= r1_ub + 1e-9
    assert bounds.hybrid.r2 <= r2_ub + 1e-9


def test_envelopes_finite_without_memory():
    r1_ub, r2_ub = envelopes(_config(20, 2, 2, 0.0, 0.0))
    assert r1_ub == 4.0
    assert r2_ub == 2.0


def test_envelope_breach_raises_or_is_recorded(fig3_config, monkeypatch):
    monkeypatch.setattr(bounds_service, "envelopes", lambda config: (0.0, 0.0))
    with pytest.raises(EnvelopeViolation) as info:
        upper_bounds(fig3_config)
    assert info.value.component == "r1"
    relaxed = upper_bounds(fig3_config, strict=False)
    assert not relaxed.envelope_ok


# ========== Monotonicity in memory ==========

def _grid_values(topology, resolution, evaluate):
    n, k1, k2 = topology
    axis = grid_axis(n, resolution)
    return np.array([[evaluate(_config(n, k1, k2, m1, m2)) for m2 in axis] for m1 in axis])


@pytest.mark.parametrize("topology", SWEEP_TOPOLOGIES)
def test_lower_bounds_never_grow_with_memory(topology):
    r1 = _grid_values(topology, 41, lambda config: lower_bound_r1(config)[0])
    r2 = _grid_values(topology, 41, lambda config: lower_bound_r2(config)[0])
    for values in (r1, r2):
        assert np.all(np.diff(values, axis=0) <= 1e-12)
        assert np.all(np.diff(values, axis=1) <= 1e-12)


@pytest.mark.parametrize("topology", SWEEP_TOPOLOGIES)
def test_envelopes_never_grow_with_memory_inside_a_regime(topology):
    n, k1, k2 = topology
    axis = grid_axis(n, 41)
    configs = [[_config(n, k1, k2, m1, m2) for m2 in axis] for m1 in axis]
    regimes = np.array([[regime_of(c) is Regime.I for c in row] for row in configs])
    for component in (0, 1):
        values = np.array([[envelopes(c)[component] for c in row] for row in configs])
        same_m1_step = regimes[1:, :] == regimes[:-1, :]
        same_m2_step = regimes[:, 1:] == regimes[:, :-1]
        assert np.all(np.diff(values, axis=0)[same_m1_step] <= 1e-12)
        assert np.all(np.diff(values, axis=1)[same_m2_step] <= 1e-12)


def test_first_layer_envelope_jumps_up_entering_regime_two():
    # M1 + K2*M2 crosses N between the two points; the regime II envelope is looser
    before = _config(20, 2, 2, 18.5, 0.5)
    after = _config(20, 2, 2, 19.0, 0.5)
    assert regime_of(before) is Regime.I
    assert regime_of(after) is Regime.II
    assert envelopes(before)[0] == pytest.approx(40 / 18.5 - 2)
    assert envelopes(after)[0] == pytest.approx(0.2)
    assert envelopes(after)[0] > envelopes(before)[0]
    assert lower_bound_r1(after)[0] <= lower_bound_r1(before)[0]


# ========== Lower bounds against achievable rates ==========

def _assert_grid_above_lower_bounds(configs, resolution):
    shares = np.linspace(0.0, 1.0, resolution)
    for config in configs:
        r1_lb = lower_bound_r1(config)[0]
        r2_lb = lower_bound_r2(config)[0]
        for alpha in shares:
            for beta in shares:
                pair = rate_hybrid(config, alpha, beta)
                assert pair.r1 >= r1_lb - 1e-9, (config, alpha, beta)
                assert pair.r2 >= r2_lb - 1e-9, (config, alpha, beta)


def test_hybrid_rates_respect_lower_bounds():
    _assert_grid_above_lower_bounds(random_configs(np.random.default_rng(21), 40), 11)


@pytest.mark.slow
def test_hybrid_rates_respect_lower_bounds_at_scale():
    _assert_grid_above_lower_bounds(random_configs(np.random.default_rng(22), 200), 21)
