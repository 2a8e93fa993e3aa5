import numpy as np
import pytest

from sparsebvar.errors import ShapeMismatch
from sparsebvar.evaluation.metrics import rmse
from sparsebvar.evaluation.report import JOINT, REPORT_COLUMNS, build_report
from sparsebvar.forecast.recursive import recursive_exercise
from tests.conftest import make_panel, model_specs_for


@pytest.fixture(scope="module")
def report(eval_forecasts):
    return build_report(eval_forecasts, "MIN", mcs_reps=200, seed=1)


def test_layout(report, eval_panel):
    table = report.table
    assert list(table.columns) == REPORT_COLUMNS
    # (3 targets + joint) x 2 models x 2 horizons
    assert len(table) == 16
    assert set(table["variable"]) == set(eval_panel.names) | {JOINT}
    assert report.summary["models"] == ["MIN", "MIN-SAVS"]
    assert report.summary["rows"] == 16


def test_common_origins_per_horizon(report):
    table = report.table
    assert (table.loc[table.horizon == 1, "n_origins"] == 24).all()
    assert (table.loc[table.horizon == 4, "n_origins"] == 21).all()


def test_benchmark_rows(report, eval_panel):
    for h in (1, 4):
        for name in eval_panel.names:
            row = report.row("MIN", h, name)
            assert row["rmse_ratio"] == 1.0
            assert row["lpl_diff"] == 0.0
            assert (row["dm_stat"], row["dm_pvalue"]) == (0.0, 1.0)
            assert (row["ag_stat"], row["ag_pvalue"]) == (0.0, 1.0)
            assert row["dm_stars"] == 0


def test_rmse_matches_forecast_errors(report, eval_forecasts):
    errors = np.array([item.errors(1)[0] for item in eval_forecasts[24:]])
    row = report.row("MIN-SAVS", 1, "y1")
    assert row["rmse"] == pytest.approx(rmse(errors))


def test_joint_rows_have_no_point_statistics(report):
    joint = report.table[report.table.variable == JOINT]
    assert len(joint) == 4
    assert joint["rmse"].isna().all()
    assert joint["dm_stat"].isna().all()
    assert joint["mcs_point"].isna().all()
    assert joint["pit_mean"].isna().all()
    assert np.isfinite(joint["lpl"].astype(float)).all()


def test_lpl_diff_is_relative_to_benchmark(report):
    other, bench = report.row("MIN-SAVS", 4, JOINT), report.row("MIN", 4, JOINT)
    assert other["lpl_diff"] == pytest.approx(other["lpl"] - bench["lpl"])


def test_mcs_and_calibration_columns_are_filled(report):
    row = report.row("MIN-SAVS", 1, "y2")
    assert row["mcs_point"] in (True, False)
    assert row["mcs_density"] in (True, False)
    assert 1 <= row["mcs_density_rank"] <= 2
    assert 0.0 <= row["pit_mean_pvalue"] <= 1.0
    assert 0.0 <= row["pit_variance_pvalue"] <= 1.0
    table = report.table
    assert table.loc[table.horizon == 1, "mcs_density"].isin([True, False]).all()


def test_cumulative_log_scores(report):
    cumulative = report.cumulative_lpl
    # 24 + 21 origins, 4 scopes, 2 models
    assert len(cumulative) == 360
    series = cumulative[(cumulative.model == "MIN") & (cumulative.horizon == 1) & (cumulative.variable == JOINT)]
    assert len(series) == 24
    assert series["cumulative_lpl"].iloc[-1] == pytest.approx(report.row("MIN", 1, JOINT)["lpl"])


def test_normalized_errors(report):
    z = report.normalized_errors
    assert len(z) == 270
    assert JOINT not in set(z["variable"])
    assert np.isfinite(z["z"]).all()


def test_missing_row_raises(report):
    with pytest.raises(ShapeMismatch):
        report.row("MIN", 8, "y1")


def test_unknown_benchmark(eval_forecasts):
    with pytest.raises(ShapeMismatch) as info:
        build_report(eval_forecasts, "BVAR")
    assert info.value.operation == "report.build_report"


def test_horizon_subset(eval_forecasts):
    subset = build_report(eval_forecasts, "MIN-SAVS", horizons=(4,), mcs_reps=50)
    assert set(subset.table["horizon"]) == {4}
    assert len(subset.table) == 8
    assert subset.row("MIN-SAVS", 4, "y3")["rmse_ratio"] == 1.0


@pytest.mark.slow
def test_sparsified_model_scores_better_on_sparse_truth():
    wins = 0
    for seed in range(20):
        # origins 1981Q2 (index 89) .. 1988Q3
        panel = make_panel(T=120, m=6, p=2, seed=100 + seed)
        forecasts = recursive_exercise(panel, model_specs_for(panel, draws=100), "1981Q2", (1,), seed=seed)
        report = build_report(forecasts, "MIN", mcs_reps=20, seed=seed)
        wins += report.row("MIN-SAVS", 1, JOINT)["lpl_diff"] > 0.0
    assert wins >= 14
