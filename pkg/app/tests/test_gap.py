import pytest

from app.errors import NotGapEligible
from app.models.bounds import Regime
from app.models.gap import R2_NOTE
from app.models.network import NetworkConfig, validate
from app.services.gap_service import (
    CSV_COLUMNS, check_point, grid_axis, report_row, sweep, sweep_csv, sweep_json,
)


def _template(n, k1, k2):
    return NetworkConfig(library_size=n, helper_count=k1, users_per_helper=k2, helper_memory=0.0, user_memory=0.0)


def test_point_check_passes_at_comparison_point(fig3_config):
    report = check_point(fig3_config)
    assert report.label.key == "II.I.C"
    assert report.case_constants == pytest.approx((1 / 48, 0.0))
    assert report.theorem_passed
    assert report.passed
    names = [c.name for c in report.checks]
    assert names == ["theorem1_r1", "theorem1_r2", "theorem1_r2_stated", "case_r1", "case_r2"]
    theorem = report.check("theorem1_r1")
    assert theorem.slack == pytest.approx(theorem.lhs - (theorem.rhs / 48 - 4))


def test_point_check_requires_enough_files():
    config = validate(_template(8, 3, 3))
    with pytest.raises(NotGapEligible):
        check_point(config)
    with pytest.raises(NotGapEligible):
        sweep(_template(8, 3, 3), 3)


def test_boundary_case_checks_are_informational(fig3_config):
    report = check_point(fig3_config.with_memories(12.5, 18.75))
    informational = [c.name for c in report.checks if c.informational]
    assert informational == ["case_r1[C]", "case_r1[E]", "case_r1[F]"]
    assert report.check("case_r1") is None
    assert report_row(report)["case_r1_c_mult"] == 1.0


def test_witnesses_are_dominated_by_scan(fig3_config):
    report = check_point(fig3_config)
    assert report.witnesses
    assert all(w.dominated for w in report.witnesses)
    assert report.witnesses[-1].case == "R2.A"


def test_grid_axis():
    assert grid_axis(20, 1) == [0.0]
    assert grid_axis(20, 5) == [0.0, 5.0, 10.0, 15.0, 20.0]


def test_sweep_is_m1_major_and_passes():
    result = sweep(_template(20, 2, 2), 5, threads=2)
    assert result.summary.points == 25
    assert result.summary.passed
    assert result.summary.envelope_failures == 0
    assert (result.reports[1].helper_memory, result.reports[1].user_memory) == (0.0, 5.0)
    assert (result.reports[5].helper_memory, result.reports[5].user_memory) == (5.0, 0.0)


def test_sweep_single_point():
    result = sweep(_template(20, 2, 2), 1)
    assert len(result.reports) == 1
    assert (result.reports[0].helper_memory, result.reports[0].user_memory) == (0.0, 0.0)


def test_sweep_order_independent_of_threads(override_settings):
    one = sweep(_template(36, 3, 3), 7, threads=1)
    many = sweep(_template(36, 3, 3), 7, threads=4)
    assert sweep_json(one) == sweep_json(many)


def test_sweep_filters():
    result = sweep(_template(20, 2, 2), 9, regime=Regime.II)
    assert result.reports
    assert all(r.label.regime is Regime.II for r in result.reports)
    only_c = sweep(_template(20, 2, 2), 9, case="I.I.C")
    assert all(r.label.key == "I.I.C" for r in only_c.reports)


def test_sweep_csv_layout():
    text = sweep_csv(sweep(_template(20, 2, 2), 3))
    lines = text.splitlines()
    assert lines[0] == f"# {R2_NOTE}"
    assert lines[1].split(",") == CSV_COLUMNS
    assert len(lines) == 2 + 9


@pytest.mark.slow
@pytest.mark.parametrize("topology", [(20, 2, 2), (36, 3, 3), (64, 4, 4), (50, 10, 2)])
def test_full_grid_certification(topology):
    result = sweep(_template(*topology), 41)
    summary = result.summary
    assert summary.points == 1681
    assert summary.theorem_failures == 0
    assert summary.case_failures == 0
    assert summary.envelope_failures == 0
