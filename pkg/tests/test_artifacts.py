import math

import numpy as np
import pandas as pd
import pytest

from sparsebvar import __version__
from sparsebvar.artifacts import (
    FORECAST_COLUMNS,
    load_fit,
    load_forecast_runs,
    prepare_output_dir,
    read_json,
    save_fit,
    save_forecast_run,
    write_csv,
    write_json,
    write_run_manifest,
)
from sparsebvar.errors import ConfigError, ShapeMismatch
from sparsebvar.model.minnesota import MinnesotaHyper
from sparsebvar.model.posterior import fit_conjugate
from tests.conftest import SMALL_GRID


class TestOutputDir:
    def test_creates_missing_directory(self, tmp_path):
        target = prepare_output_dir(tmp_path / "a" / "b")
        assert target.is_dir()

    def test_empty_directory_is_reused(self, tmp_path):
        assert prepare_output_dir(tmp_path) == tmp_path

    def test_refuses_non_empty_without_force(self, tmp_path):
        (tmp_path / "old.csv").write_text("x")
        with pytest.raises(ConfigError) as info:
            prepare_output_dir(tmp_path)
        assert info.value.operation == "artifacts.prepare_output_dir"
        assert (tmp_path / "old.csv").exists()

    def test_force_replaces_contents(self, tmp_path):
        (tmp_path / "old.csv").write_text("x")
        prepare_output_dir(tmp_path, force=True)
        assert list(tmp_path.iterdir()) == []


def test_json_is_sorted_and_nan_free(tmp_path):
    path = write_json({"b": np.float64(np.nan), "a": np.arange(3), "c": (1.5, math.inf)}, tmp_path / "x.json")
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert "NaN" not in text and "Infinity" not in text
    assert read_json(path) == {"a": [0, 1, 2], "b": None, "c": [1.5, None]}


def test_csv_float_format(tmp_path):
    path = write_csv(pd.DataFrame({"x": [1.0 / 3.0], "y": ["a"]}), tmp_path / "t.csv")
    assert path.read_text() == "x,y\n0.3333333333,a\n"


def test_run_manifest(tmp_path):
    write_run_manifest(tmp_path, "fit", {"workers": 1}, {"seed": 2 ** 63}, {"data": "abc"})
    manifest = read_json(tmp_path / "manifest.json")
    assert manifest == {
        "version": __version__,
        "command": "fit",
        "config": {"workers": 1},
        "seeds": {"seed": str(2 ** 63)},
        "data_hashes": {"data": "abc"},
    }


def test_fit_round_trip(tmp_path, small_panel):
    fit = fit_conjugate(small_panel, 2, MinnesotaHyper(theta1=0.2), grid=SMALL_GRID)
    directory = save_fit(fit, tmp_path / "fits" / "MIN", small_panel.names, {"model": "MIN"})
    moments, meta = load_fit(directory)
    np.testing.assert_array_equal(moments.a_bar, fit.moments.a_bar)
    np.testing.assert_array_equal(moments.v_bar, fit.moments.v_bar)
    np.testing.assert_array_equal(moments.s1_scale, fit.moments.s1_scale)
    assert moments.s1_dof == fit.moments.s1_dof
    assert meta["model"] == "MIN"
    assert meta["names"] == list(small_panel.names)
    assert meta["theta1"] in SMALL_GRID
    grid = pd.read_csv(directory / "theta_grid.csv")
    assert sorted(grid["theta1"]) == sorted(SMALL_GRID)


class TestForecastRuns:
    def test_table_rows(self, tmp_path, eval_forecasts):
        item = eval_forecasts[23]
        table = save_forecast_run(item, tmp_path / "MIN")
        assert list(table.columns) == FORECAST_COLUMNS
        # 2 horizons x 3 variables
        assert len(table) == 6
        assert (table["draw_file"] == "1978Q3_paths.npy").all()
        assert table.loc[table.horizon == 4, "realized"].isna().all()
        assert (tmp_path / "MIN" / "1978Q3_paths.npy").exists()

    def test_saved_origins_reload(self, tmp_path, eval_forecasts):
        originals = [eval_forecasts[30], eval_forecasts[23], eval_forecasts[0]]
        for item in originals:
            save_forecast_run(item, tmp_path / item.model)
        write_json({"ignored": True}, tmp_path / "MIN" / "summary.json")

        loaded = load_forecast_runs(tmp_path)
        assert [(f.model, f.origin_index) for f in loaded] == [("MIN", 55), ("MIN", 78), ("MIN-SAVS", 61)]
        by_key = {(f.model, f.origin): f for f in loaded}
        for item in originals:
            again = by_key[(item.model, item.origin)]
            np.testing.assert_array_equal(again.run.paths, item.run.paths)
            np.testing.assert_array_equal(again.run.cond_covs, item.run.cond_covs)
            np.testing.assert_array_equal(again.realized, item.realized)
            np.testing.assert_allclose(again.stats.sd, item.stats.sd)
            assert again.targets == item.targets
            assert again.theta1 == item.theta1
            np.testing.assert_allclose(again.errors(1), item.errors(1))

    def test_nothing_saved(self, tmp_path):
        with pytest.raises(ShapeMismatch):
            load_forecast_runs(tmp_path)
