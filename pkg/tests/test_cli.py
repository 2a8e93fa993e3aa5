import json

import numpy as np
import pandas as pd
import pytest

from sparsebvar.artifacts import read_json
from sparsebvar.main import EXIT_CONFIG, EXIT_OK, main

pytestmark = pytest.mark.usefixtures("restore_logging")

SIMULATED = {"source": "simulated", "simulated": {"m": 3, "T": 100, "p": 2, "burn_in": 50}}
MODEL = {"p": 2, "theta_grid": [0.05, 0.2, 0.5]}


def config_file(tmp_path, payload):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(payload))
    return str(path)


def study_config(tmp_path):
    return config_file(tmp_path, {
        "study": {"m": [2], "T": [40], "p": 1, "replications": 1, "burn_in": 20,
                  "lambdas": [1.0], "savs_median": False, "cda": False},
        "sampling": {"draws": 10, "seed": 4},
        "workers": 1,
    })


def evaluation_config(tmp_path):
    return config_file(tmp_path, {
        "models": [
            {"name": "MIN", **MODEL},
            {"name": "MIN-SAVS", **MODEL, "sparsify": {"enabled": True, "lam": 1.0}},
        ],
        "data": SIMULATED,
        "sampling": {"draws": 30, "seed": 8},
        "forecast": {"split_date": "1977Q4", "horizons": [1, 4]},
        "evaluate": {"mcs_reps": 200},
        "workers": 1,
    })


class TestStudy:
    def test_writes_tables_and_refuses_to_overwrite(self, tmp_path, capsys):
        config, output = study_config(tmp_path), str(tmp_path / "study")
        assert main(["study", "--config", config, "--output", output]) == EXIT_OK
        assert capsys.readouterr().out.strip() == f"study completed -> {output}"
        for name in ("study.csv", "replications.csv", "heatmaps.csv", "summary.json", "manifest.json"):
            assert (tmp_path / "study" / name).exists()
        table = pd.read_csv(tmp_path / "study" / "study.csv")
        assert list(table["estimator"]) == ["MIN", "MIN-lambda=1"]
        first = {path.name: path.read_bytes() for path in (tmp_path / "study").iterdir()}

        assert main(["study", "--config", config, "--output", output]) == EXIT_CONFIG
        assert main(["study", "--config", config, "--output", output, "--force"]) == EXIT_OK
        assert {path.name: path.read_bytes() for path in (tmp_path / "study").iterdir()} == first

    def test_seed_override_is_recorded(self, tmp_path):
        output = tmp_path / "study"
        assert main(["study", "--config", study_config(tmp_path), "--output", str(output), "--seed", "99"]) == EXIT_OK
        manifest = read_json(output / "manifest.json")
        assert manifest["command"] == "study"
        assert manifest["seeds"] == {"seed": "99"}
        assert manifest["config"]["sampling"]["seed"] == 99


def test_evaluate_is_reproducible(tmp_path):
    config = evaluation_config(tmp_path)
    for name in ("first", "second"):
        assert main(["evaluate", "--config", config, "--output", str(tmp_path / name)]) == EXIT_OK
    first = (tmp_path / "first" / "report.csv").read_bytes()
    assert first == (tmp_path / "second" / "report.csv").read_bytes()

    report = pd.read_csv(tmp_path / "first" / "report.csv")
    # (3 targets + joint) x 2 models x 2 horizons
    assert len(report) == 16
    bench = report[(report.model == "MIN") & (report.variable != "joint")]
    np.testing.assert_array_equal(bench["rmse_ratio"], 1.0)
    np.testing.assert_array_equal(bench["lpl_diff"], 0.0)
    assert set(report.loc[report.horizon == 1, "n_origins"]) == {24}
    assert set(report.loc[report.horizon == 4, "n_origins"]) == {21}
    summary = read_json(tmp_path / "first" / "summary.json")
    assert summary["benchmark"] == "MIN"
    assert (tmp_path / "first" / "forecasts" / "MIN-SAVS" / "forecasts.csv").exists()


def test_evaluate_reuses_saved_forecasts(tmp_path):
    forecast_out = tmp_path / "forecast"
    assert main(["forecast", "--config", evaluation_config(tmp_path), "--output", str(forecast_out)]) == EXIT_OK
    table = pd.read_csv(forecast_out / "forecasts" / "MIN" / "forecasts.csv")
    # 24 origins x 2 horizons x 3 variables
    assert len(table) == 144

    payload = json.loads((tmp_path / "run.json").read_text())
    payload["evaluate"] = {"mcs_reps": 50, "benchmark": "MIN-SAVS", "forecasts_dir": str(forecast_out / "forecasts")}
    config = config_file(tmp_path, payload)
    assert main(["evaluate", "--config", config, "--output", str(tmp_path / "evaluate")]) == EXIT_OK
    report = pd.read_csv(tmp_path / "evaluate" / "report.csv")
    bench = report[(report.model == "MIN-SAVS") & (report.variable == "y1")]
    np.testing.assert_array_equal(bench["rmse_ratio"], 1.0)


def test_fit_writes_posterior_and_inclusion_frequencies(tmp_path):
    config = config_file(tmp_path, {
        "models": [{"name": "MIN", **MODEL}, {"name": "MIN SAVS", **MODEL, "sparsify": {"enabled": True}}],
        "data": SIMULATED,
        "sampling": {"draws": 20, "seed": 1},
    })
    output = tmp_path / "fit"
    assert main(["fit", "--config", config, "--output", str(output), "--workers", "1"]) == EXIT_OK
    plain, sparse = output / "fits" / "MIN", output / "fits" / "MIN_SAVS"
    for directory in (plain, sparse):
        for name in ("a_bar.npy", "v_bar.npy", "s1_scale.npy", "fit.json", "theta_grid.csv"):
            assert (directory / name).exists()
    assert not (plain / "coefficient_inclusion.npy").exists()
    assert np.load(sparse / "coefficient_inclusion.npy").shape == (7, 3)
    edges = np.load(sparse / "edge_inclusion.npy")
    np.testing.assert_allclose(np.diag(edges), 1.0)
    assert read_json(output / "summary.json")["models"]["MIN"]["m"] == 3


def test_fixed_theta_fit_records_the_value(tmp_path):
    config = config_file(tmp_path, {
        "model": {"name": "L", "p": 2, "theta_mode": "fixed", "theta1": 0.05},
        "data": SIMULATED,
    })
    output = tmp_path / "fit"
    assert main(["fit", "--config", config, "--output", str(output)]) == EXIT_OK
    meta = read_json(output / "fits" / "L" / "fit.json")
    assert meta["theta1"] == 0.05
    assert meta["theta_mode"] == "fixed"
    assert not (output / "fits" / "L" / "theta_grid.csv").exists()


@pytest.mark.parametrize("payload", ['{"workers": -1}', "{broken", '{"model": {"size": "XL"}}'])
def test_bad_config_exits_with_config_code(tmp_path, payload):
    path = tmp_path / "run.json"
    path.write_text(payload)
    assert main(["fit", "--config", str(path), "--output", str(tmp_path / "out")]) == EXIT_CONFIG
    assert not (tmp_path / "out").exists()


def test_missing_config_file(tmp_path):
    assert main(["study", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG
