"""Monte Carlo study of sparsified estimators against the non-sparse Minnesota benchmark"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from sparsebvar.errors import NotPositiveDefinite, tags_operation
from sparsebvar.model.minnesota import DEFAULT_PI, MinnesotaHyper
from sparsebvar.model.posterior import THETA1_GRID, fit_conjugate, sample_posterior
from sparsebvar.model.var_core import CovMatrix, VarCoefficients
from sparsebvar.monitor.log import RunLogger
from sparsebvar.runner.manager import run_tasks
from sparsebvar.simulation.dgp import (
    CovParameterization,
    DgpConfig,
    cov_mae,
    draw_dgp,
    mae,
    simulate_series,
)
from sparsebvar.sparsify.precision import (
    PrecisionConfig,
    PrecisionMode,
    resolve_varpi,
    sparsify_precision,
)
from sparsebvar.sparsify.savs import (
    SavsConfig,
    SavsScheme,
    column_norms,
    coordinate_descent,
    gram_matrix,
    savs_draw,
    savs_point,
)
from sparsebvar.utils import derive_seed, hash_array

logger = logging.getLogger(__name__)

BENCHMARK_NAME = "MIN"
STUDY_COLUMNS = [
    "m", "T", "sparsity", "estimator", "lambda", "varpi",
    "mean_ratio_coeffs", "se_coeffs", "mean_ratio_cov", "se_cov", "replications",
    "mean_mae_coeffs", "mean_mae_cov",
]


class EstimatorKind(Enum):
    BENCHMARK = "benchmark"
    PER_DRAW = "per_draw"
    SAVS_MEDIAN = "savs_median"
    CDA = "cda"


@dataclass(frozen=True)
class EstimatorSpec:
    name: str
    kind: EstimatorKind
    lam: float = 0.0
    varpi: Optional[float] = None

    @property
    def precision_penalty(self) -> float:
        return resolve_varpi(self.varpi, self.lam)


def default_estimators(lambdas: Sequence[float] = (0.01, 0.1, 0.5, 1.0)) -> List[EstimatorSpec]:
    specs = [EstimatorSpec(BENCHMARK_NAME, EstimatorKind.BENCHMARK)]
    specs += [EstimatorSpec(f"MIN-lambda={lam:g}", EstimatorKind.PER_DRAW, lam) for lam in lambdas]
    specs.append(EstimatorSpec("SAVS-Median", EstimatorKind.SAVS_MEDIAN, 1.0))
    specs.append(EstimatorSpec("CDA", EstimatorKind.CDA, 1.0))
    return specs


@dataclass(frozen=True)
class StudyOptions:
    draws: int = 500
    seed: int = 0
    theta_grid: Tuple[float, ...] = THETA1_GRID
    pi: float = DEFAULT_PI
    zeta: float = 2.0
    scheme: SavsScheme = SavsScheme.LAG_WISE
    kappa_prec: float = 2.0
    cov_parameterization: CovParameterization = CovParameterization.SIGMA
    workers: int = 1


@dataclass
class EstimateSummary:
    coeffs: np.ndarray
    sigma: np.ndarray
    coeff_sd: np.ndarray


@dataclass
class ReplicationOutcome:
    config_index: int
    replication: int
    seed: int
    data_hash: str
    theta1: float
    mae_coeffs: Dict[str, float] = field(default_factory=dict)
    mae_cov: Dict[str, float] = field(default_factory=dict)
    abs_error: Dict[str, np.ndarray] = field(default_factory=dict)
    coeff_sd: Dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class StudyResult:
    table: pd.DataFrame
    replications: pd.DataFrame
    heatmaps: pd.DataFrame


def _median_cov(sigmas: np.ndarray) -> np.ndarray:
    return np.median(sigmas, axis=0)


def _estimate(spec: EstimatorSpec, coeff_draws: List[VarCoefficients], cov_draws: List[CovMatrix],
              norms, gram: np.ndarray, posterior_mean_sigma: np.ndarray,
              options: StudyOptions) -> EstimateSummary:
    plain_A = np.stack([c.A for c in coeff_draws])
    plain_S = np.stack([c.sigma for c in cov_draws])
    if spec.kind is EstimatorKind.BENCHMARK:
        return EstimateSummary(np.median(plain_A, axis=0), _median_cov(plain_S), plain_A.std(axis=0))

    savs_cfg = SavsConfig(lam=spec.lam, zeta=options.zeta, scheme=options.scheme)
    mode = PrecisionMode.ITERATE_TO_TOL if spec.kind is EstimatorKind.CDA else PrecisionMode.ONE_SWEEP
    prec_cfg = PrecisionConfig(varpi=spec.precision_penalty, kappa_prec=options.kappa_prec, mode=mode)

    if spec.kind is EstimatorKind.SAVS_MEDIAN:
        m, p = coeff_draws[0].m, coeff_draws[0].p
        median = VarCoefficients(np.median(plain_A, axis=0), m, p)
        sparse_A = savs_point(median, norms, savs_cfg).coeffs_sparse.A
        try:
            point_cov = CovMatrix(_median_cov(plain_S))
        except NotPositiveDefinite:
            point_cov = CovMatrix(posterior_mean_sigma)
        sparse_S = sparsify_precision(point_cov, prec_cfg).covariance().sigma
        return EstimateSummary(np.array(sparse_A), np.array(sparse_S), np.full(sparse_A.shape, np.nan))

    if spec.kind is EstimatorKind.CDA:
        sparse_A = np.stack([coordinate_descent(c, gram, savs_cfg).coeffs_sparse.A for c in coeff_draws])
    else:
        sparse_A = np.stack([savs_draw(c, norms, savs_cfg).coeffs_sparse.A for c in coeff_draws])
    sparse_S = np.stack([sparsify_precision(c, prec_cfg).covariance().sigma for c in cov_draws])
    return EstimateSummary(np.median(sparse_A, axis=0), _median_cov(sparse_S), sparse_A.std(axis=0))


def run_replication(cfg: DgpConfig, config_index: int, replication: int,
                    estimators: Sequence[EstimatorSpec], options: StudyOptions) -> ReplicationOutcome:
    """One truth, one data set and one posterior shared by every estimator"""
    rep_seed = derive_seed(options.seed, config_index, replication)
    cfg = cfg.with_seed(rep_seed)
    truth = draw_dgp(cfg)
    panel = simulate_series(truth, cfg.T, cfg.burn_in, seed=rep_seed)

    hyper = MinnesotaHyper(theta1=options.theta_grid[0], pi=options.pi)
    fit = fit_conjugate(panel, cfg.p, hyper, grid=options.theta_grid)
    draws = sample_posterior(fit.moments, options.draws, derive_seed(rep_seed, 2))
    coeff_draws = [draw.coeffs for draw in draws]
    cov_draws = [draw.cov for draw in draws]
    norms = column_norms(fit.design)
    gram = gram_matrix(fit.design)

    outcome = ReplicationOutcome(
        config_index=config_index,
        replication=replication,
        seed=rep_seed,
        data_hash=hash_array(panel.values),
        theta1=fit.theta1,
    )
    true_A = np.array(truth.coeffs_true.A)
    true_S = np.array(truth.sigma_true.sigma)
    for spec in estimators:
        summary = _estimate(spec, coeff_draws, cov_draws, norms, gram,
                            fit.moments.sigma_mean(), options)
        # lag coefficients only; the intercept row passes through unchanged
        outcome.mae_coeffs[spec.name] = mae(summary.coeffs[:-1], true_A[:-1])
        outcome.mae_cov[spec.name] = cov_mae(summary.sigma, true_S, options.cov_parameterization)
        outcome.abs_error[spec.name] = np.abs(summary.coeffs - true_A)
        outcome.coeff_sd[spec.name] = summary.coeff_sd
    return outcome


def _mean_se(values: np.ndarray) -> Tuple[float, float]:
    if len(values) < 2:
        return float(np.mean(values)), float("nan")
    return float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(len(values)))


@tags_operation("study.run_study")
def run_study(
    configs: Sequence[DgpConfig],
    replications: int,
    estimators: Optional[Sequence[EstimatorSpec]] = None,
    options: Optional[StudyOptions] = None,
    run_logger: Optional[RunLogger] = None,
) -> StudyResult:
    """MAE ratios against the grid-ML Minnesota benchmark for every (config, estimator) cell"""
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")
    options = options or StudyOptions()
    estimators = list(estimators or default_estimators())
    if not any(spec.kind is EstimatorKind.BENCHMARK for spec in estimators):
        estimators.insert(0, EstimatorSpec(BENCHMARK_NAME, EstimatorKind.BENCHMARK))
    benchmark = next(spec.name for spec in estimators if spec.kind is EstimatorKind.BENCHMARK)

    tasks = [(ci, rep) for ci in range(len(configs)) for rep in range(replications)]
    logger.info(f"Study: {len(configs)} config(s) x {replications} replication(s), "
                f"{len(estimators)} estimators, {options.draws} draws each")
    outcomes = run_tasks(
        lambda task: run_replication(configs[task[0]], task[0], task[1], estimators, options),
        tasks, workers=options.workers, label="study replication", run_logger=run_logger,
    )

    table_rows, rep_rows, heat_rows = [], [], []
    for ci, cfg in enumerate(configs):
        cell = [o for o in outcomes if o.config_index == ci]
        labels = {"m": cfg.m, "T": cfg.T, "sparsity": cfg.sparsity_label}
        for spec in estimators:
            coeff = np.array([o.mae_coeffs[spec.name] for o in cell])
            cov = np.array([o.mae_cov[spec.name] for o in cell])
            ratio_coeff = coeff / np.array([o.mae_coeffs[benchmark] for o in cell])
            ratio_cov = cov / np.array([o.mae_cov[benchmark] for o in cell])
            mean_c, se_c = _mean_se(ratio_coeff)
            mean_s, se_s = _mean_se(ratio_cov)
            table_rows.append({
                **labels, "estimator": spec.name, "lambda": spec.lam,
                "varpi": spec.precision_penalty if spec.kind is not EstimatorKind.BENCHMARK else 0.0,
                "mean_ratio_coeffs": mean_c, "se_coeffs": se_c,
                "mean_ratio_cov": mean_s, "se_cov": se_s, "replications": len(cell),
                "mean_mae_coeffs": float(coeff.mean()), "mean_mae_cov": float(cov.mean()),
            })
            for o, rc, rs in zip(cell, ratio_coeff, ratio_cov):
                rep_rows.append({
                    **labels, "replication": o.replication, "seed": str(o.seed),
                    "data_hash": o.data_hash, "theta1": o.theta1, "estimator": spec.name,
                    "mae_coeffs": o.mae_coeffs[spec.name], "mae_cov": o.mae_cov[spec.name],
                    "ratio_coeffs": float(rc), "ratio_cov": float(rs),
                })
            abs_error = np.mean([o.abs_error[spec.name] for o in cell], axis=0)
            coeff_sd = np.mean([o.coeff_sd[spec.name] for o in cell], axis=0)
            for (row, col), value in np.ndenumerate(abs_error):
                heat_rows.append({
                    **labels, "estimator": spec.name, "row": row, "col": col,
                    "abs_error": float(value), "posterior_sd": float(coeff_sd[row, col]),
                })

    return StudyResult(
        table=pd.DataFrame(table_rows, columns=STUDY_COLUMNS),
        replications=pd.DataFrame(rep_rows),
        heatmaps=pd.DataFrame(heat_rows),
    )
