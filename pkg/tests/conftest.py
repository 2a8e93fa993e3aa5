import logging
from pathlib import Path

import numpy as np
import pytest

from sparsebvar.config.settings import settings
from sparsebvar.forecast.recursive import ModelSpec, recursive_exercise
from sparsebvar.model.var_core import TimeSeriesPanel, VarCoefficients
from sparsebvar.simulation.dgp import DgpConfig, draw_dgp, simulate_series
from sparsebvar.sparsify.precision import PrecisionConfig
from sparsebvar.sparsify.savs import SavsConfig

REPO_ROOT = Path(__file__).resolve().parents[1]
MANIFEST_PATH = REPO_ROOT / "data" / "fredqd_manifest.csv"

SMALL_GRID = (0.05, 0.2, 0.5)
EVAL_HORIZONS = (1, 4)


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Keep run logs under the test's tmp dir and the run registry off"""
    monkeypatch.setattr(settings, "LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setattr(settings, "DATABASE_URL", "")
    monkeypatch.setattr(settings, "WORKERS", 1)


@pytest.fixture
def restore_logging():
    """Undo setup_logging's root handlers after the test"""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def make_panel(T: int = 120, m: int = 3, p: int = 2, seed: int = 3, sparsity: str = "sparse") -> TimeSeriesPanel:
    truth = draw_dgp(DgpConfig(m=m, T=T, p=p, sparsity=sparsity, seed=seed))
    return simulate_series(truth, T, burn_in=50, seed=seed)


@pytest.fixture
def small_panel() -> TimeSeriesPanel:
    return make_panel()


@pytest.fixture
def stable_coeffs() -> VarCoefficients:
    A1 = np.array([[0.5, 0.1, 0.0], [0.0, 0.4, 0.2], [0.1, 0.0, 0.3]])
    A2 = np.array([[0.1, 0.0, 0.0], [0.0, -0.1, 0.0], [0.05, 0.0, 0.1]])
    return VarCoefficients.from_lags([A1, A2], intercept=np.array([0.1, -0.2, 0.0]))


def model_specs_for(panel: TimeSeriesPanel, draws: int = 30):
    common = dict(variables=panel.names, p=2, theta_grid=SMALL_GRID, draws=draws, targets=panel.names)
    return [
        ModelSpec(name="MIN", **common),
        ModelSpec(name="MIN-SAVS", savs=SavsConfig(lam=1.0), precision=PrecisionConfig(varpi=0.1), **common),
    ]


@pytest.fixture(scope="session")
def eval_panel() -> TimeSeriesPanel:
    # 1959Q1 + 80 quarters; origins 1972Q4 (index 55) .. 1978Q3
    return make_panel(T=80, seed=11)


@pytest.fixture(scope="session")
def eval_forecasts(eval_panel):
    return recursive_exercise(eval_panel, model_specs_for(eval_panel), "1972Q4", EVAL_HORIZONS, seed=5)
