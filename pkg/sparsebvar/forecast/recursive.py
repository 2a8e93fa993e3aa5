"""Expanding-window forecast exercise over a set of model specifications.

At every origin each model is re-estimated on the data available up to that
period, standardized in-sample, and forecast over all horizons. Realized
values are recorded in the same standardized space.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from sparsebvar.data.manifest import DEFAULT_TARGETS, ModelSize
from sparsebvar.data.transforms import StandardizationStats, apply_standardization, standardize
from sparsebvar.errors import ShapeMismatch, SparseBVARError, tags_operation
from sparsebvar.forecast.factors import pca_factors
from sparsebvar.forecast.simulate import DEFAULT_HORIZONS, ForecastRun, compose_draws, simulate_forecast
from sparsebvar.model.minnesota import DEFAULT_PI, MinnesotaHyper
from sparsebvar.model.posterior import THETA1_GRID, fit_conjugate, sample_posterior
from sparsebvar.model.var_core import TimeSeriesPanel
from sparsebvar.monitor.log import RunLogger
from sparsebvar.runner.manager import run_tasks
from sparsebvar.sparsify.precision import PrecisionConfig, sparsify_precision_chain
from sparsebvar.sparsify.savs import SavsConfig, column_norms, sparsify_chain
from sparsebvar.utils import derive_seed

logger = logging.getLogger(__name__)

LARGE_THETA1_CHOICES: Tuple[float, ...] = (0.025, 0.05, 0.075)


class ThetaMode(Enum):
    GRID = "grid"
    FIXED = "fixed"


@dataclass(frozen=True)
class ModelSpec:
    """One forecasting model: variable set, prior tightness selection and sparsification"""
    name: str
    variables: Tuple[str, ...]
    size: ModelSize = ModelSize.S
    factor_sources: Tuple[str, ...] = ()
    n_factors: int = 3
    p: int = 5
    theta_mode: ThetaMode = ThetaMode.GRID
    theta1: float = 0.05
    theta_grid: Tuple[float, ...] = THETA1_GRID
    pi: float = DEFAULT_PI
    savs: Optional[SavsConfig] = None
    precision: Optional[PrecisionConfig] = None
    draws: int = 500
    sims_per_draw: int = 1
    targets: Tuple[str, ...] = DEFAULT_TARGETS

    def __post_init__(self):
        object.__setattr__(self, "size", ModelSize(self.size))
        object.__setattr__(self, "theta_mode", ThetaMode(self.theta_mode))
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "factor_sources", tuple(self.factor_sources))
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.p < 1 or self.draws < 1 or self.sims_per_draw < 1:
            raise ValueError(f"{self.name}: p, draws and sims_per_draw must be >= 1")
        if self.size is ModelSize.FA and not self.factor_sources:
            raise ValueError(f"{self.name}: factor-augmented model needs factor sources")
        missing = [t for t in self.targets if t not in self.variables]
        if missing:
            raise ValueError(f"{self.name}: targets {missing} are not model variables")

    @property
    def sparse(self) -> bool:
        return self.savs is not None or self.precision is not None

    @property
    def model_names(self) -> Tuple[str, ...]:
        if self.size is ModelSize.FA:
            return self.variables + tuple(f"F{i + 1}" for i in range(self.n_factors))
        return self.variables

    def with_name(self, name: str) -> "ModelSpec":
        return replace(self, name=name)


def default_theta_mode(size: ModelSize) -> ThetaMode:
    """Grid-ML for small, medium and factor-augmented systems; fixed for the large one"""
    return ThetaMode.FIXED if ModelSize(size) is ModelSize.L else ThetaMode.GRID


@dataclass
class OriginForecast:
    model: str
    origin: str
    origin_index: int
    run: ForecastRun
    realized: np.ndarray  # (len(horizons), len(targets)), NaN past the sample end
    targets: Tuple[str, ...]
    theta1: float
    log_ml: float
    stats: StandardizationStats
    metadata: dict = field(default_factory=dict)

    def target_positions(self) -> List[int]:
        return [self.run.names.index(t) for t in self.targets]

    def errors(self, h: int) -> np.ndarray:
        """Realized minus point forecast for every target at horizon h"""
        k = self.run.horizon_position(h)
        return self.realized[k] - self.run.point_at(h)[self.target_positions()]


def model_panel(panel: TimeSeriesPanel, spec: ModelSpec) -> TimeSeriesPanel:
    base = panel.select(spec.variables)
    if spec.size is not ModelSize.FA:
        return base
    _, factors = pca_factors(panel.select(spec.factor_sources), spec.n_factors)
    return TimeSeriesPanel(
        np.hstack([base.values, factors.values]),
        base.names + factors.names,
        base.dates,
    )


def _realized(panel: TimeSeriesPanel, spec: ModelSpec, origin_index: int,
              horizons: Sequence[int], stats: StandardizationStats) -> np.ndarray:
    columns = [panel.names.index(t) for t in spec.targets]
    positions = [stats.names.index(t) for t in spec.targets]
    target_stats = StandardizationStats(stats.mean[positions], stats.sd[positions], spec.targets)
    out = np.full((len(horizons), len(spec.targets)), np.nan)
    for k, h in enumerate(horizons):
        if origin_index + h < panel.T:
            out[k] = apply_standardization(panel.values[origin_index + h, columns], target_stats)
    return out


def forecast_origin(panel: TimeSeriesPanel, spec: ModelSpec, origin_index: int,
                    horizons: Sequence[int], seed: int) -> OriginForecast:
    """Estimate `spec` on rows up to and including `origin_index` and forecast every horizon"""
    window = panel.head(origin_index + 1)
    scaled, stats = standardize(model_panel(window, spec))

    hyper = MinnesotaHyper(theta1=spec.theta1, pi=spec.pi)
    grid = spec.theta_grid if spec.theta_mode is ThetaMode.GRID else None
    fit = fit_conjugate(scaled, spec.p, hyper, grid=grid)
    draws = sample_posterior(fit.moments, spec.draws, derive_seed(seed, 0))

    sparse_coeffs = sparse_precisions = None
    metadata = {"theta1": fit.theta1, "log_ml": fit.log_ml}
    if spec.savs is not None:
        sparse_coeffs, freq = sparsify_chain(draws, column_norms(fit.design), spec.savs)
        metadata["coefficient_inclusion"] = float(freq.mean())
    if spec.precision is not None:
        sparse_precisions, edges = sparsify_precision_chain(draws, spec.precision)
        metadata["edge_inclusion"] = float(edges.mean())

    density = [scaled.names.index(t) for t in spec.targets]
    run = simulate_forecast(
        compose_draws(draws, sparse_coeffs, sparse_precisions),
        scaled.values[-spec.p:],
        horizons=horizons,
        sims_per_draw=spec.sims_per_draw,
        seed=derive_seed(seed, 1),
        density_indices=density,
        names=scaled.names,
        origin=panel.dates[origin_index],
    )
    run.metadata.update(metadata, model=spec.name)
    return OriginForecast(
        model=spec.name,
        origin=panel.dates[origin_index],
        origin_index=origin_index,
        run=run,
        realized=_realized(panel, spec, origin_index, run.horizons, stats),
        targets=spec.targets,
        theta1=fit.theta1,
        log_ml=fit.log_ml,
        stats=stats,
        metadata=metadata,
    )


def origin_indices(panel: TimeSeriesPanel, split_date: str) -> List[int]:
    """From the last training period up to the penultimate observation"""
    return list(range(panel.index_of(split_date), panel.T - 1))


def iter_recursive(
    panel: TimeSeriesPanel,
    specs: Sequence[ModelSpec],
    split_date: str,
    horizons: Sequence[int] = DEFAULT_HORIZONS,
    seed: int = 0,
    workers: int = 1,
    run_logger: Optional[RunLogger] = None,
) -> Iterator[OriginForecast]:
    """Forecasts model by model, origin by origin, in a fixed order.

    Arguments are validated eagerly; estimation runs lazily in batches.
    Every model at an origin draws from the same (seed, origin) stream.
    """
    names = [spec.name for spec in specs]
    if len(set(names)) != len(names):
        raise ShapeMismatch(f"model names must be unique, got {names}")
    horizons = tuple(sorted(set(int(h) for h in horizons)))
    origins = origin_indices(panel, split_date)
    logger.info(f"Recursive exercise: {len(specs)} model(s) x {len(origins)} origin(s), horizons {horizons}")

    tasks = [(si, oi, t) for si in range(len(specs)) for oi, t in enumerate(origins)]
    return _stream(panel, specs, tasks, horizons, seed, workers, run_logger)


def _stream(panel, specs, tasks, horizons, seed, workers, run_logger) -> Iterator[OriginForecast]:
    def run_one(task: Tuple[int, int, int]) -> OriginForecast:
        si, oi, t = task
        try:
            return forecast_origin(panel, specs[si], t, horizons, derive_seed(seed, oi))
        except SparseBVARError:
            logger.error(f"Model {specs[si].name} failed at origin {panel.dates[t]}")
            raise

    batch = max(1, 2 * max(workers, 1))
    for start in range(0, len(tasks), batch):
        yield from run_tasks(run_one, tasks[start:start + batch], workers=workers,
                             label="forecast origin", run_logger=run_logger)


@tags_operation("recursive.recursive_exercise")
def recursive_exercise(
    panel: TimeSeriesPanel,
    specs: Sequence[ModelSpec],
    split_date: str,
    horizons: Sequence[int] = DEFAULT_HORIZONS,
    seed: int = 0,
    workers: int = 1,
    run_logger: Optional[RunLogger] = None,
) -> List[OriginForecast]:
    return list(iter_recursive(panel, specs, split_date, horizons, seed, workers, run_logger))
