"""Point and density forecast accuracy: RMSE, log predictive likelihoods, loss matrices"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import logsumexp
from scipy.stats import multivariate_t

from sparsebvar.errors import (
    DivisionByZero,
    EmptyInput,
    NotPositiveDefinite,
    ShapeMismatch,
    tags_operation,
)
from sparsebvar.model.posterior import PredictiveT


class LossKind(str, Enum):
    SQUARED_ERROR = "squared_error"
    NEGATIVE_LOG_SCORE = "negative_log_score"


@tags_operation("metrics.rmse")
def rmse(errors: Sequence[float]) -> float:
    errors = np.asarray(errors, dtype=float).reshape(-1)
    if errors.size == 0:
        raise EmptyInput("no forecast errors")
    return float(np.sqrt(np.mean(errors ** 2)))


@tags_operation("metrics.rmse_ratio")
def rmse_ratio(model_errors: Sequence[float], benchmark_errors: Sequence[float]) -> float:
    model_errors = np.asarray(model_errors, dtype=float).reshape(-1)
    benchmark_errors = np.asarray(benchmark_errors, dtype=float).reshape(-1)
    if model_errors.shape != benchmark_errors.shape:
        raise ShapeMismatch(f"{model_errors.size} model errors vs {benchmark_errors.size} benchmark errors")
    denominator = rmse(benchmark_errors)
    if denominator == 0.0:
        raise DivisionByZero("benchmark RMSE is zero")
    return rmse(model_errors) / denominator


@tags_operation("metrics.mixture_log_score")
def mixture_log_score(means: np.ndarray, covs: np.ndarray, realized: np.ndarray) -> float:
    """log (1/R) sum_r N(realized; means[r], covs[r])"""
    means = np.atleast_2d(np.asarray(means, dtype=float))
    covs = np.asarray(covs, dtype=float).reshape(means.shape[0], means.shape[1], means.shape[1])
    realized = np.asarray(realized, dtype=float).reshape(-1)
    if realized.shape[0] != means.shape[1]:
        raise ShapeMismatch(f"realized has {realized.shape[0]} entries, components have {means.shape[1]}")
    try:
        factors = np.linalg.cholesky(covs)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("mixture component covariance is not positive definite") from None

    d = realized.shape[0]
    resid = np.linalg.solve(factors, (realized - means)[..., None])[..., 0]
    log_det = 2.0 * np.log(np.diagonal(factors, axis1=1, axis2=2)).sum(axis=1)
    log_dens = -0.5 * (d * np.log(2.0 * np.pi) + log_det + np.einsum("rd,rd->r", resid, resid))
    return float(logsumexp(log_dens) - np.log(means.shape[0]))


@tags_operation("metrics.log_predictive_likelihood")
def log_predictive_likelihood(
    components: Sequence[Tuple[np.ndarray, np.ndarray]],
    realized: np.ndarray,
    scope: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Per-origin log scores. `scope` picks component dimensions (one index for a
    marginal score); the marginal of a Gaussian mixture is the mixture of sub-blocks."""
    realized = np.atleast_2d(np.asarray(realized, dtype=float))
    if len(components) != realized.shape[0]:
        raise ShapeMismatch(f"{len(components)} origins of components, {realized.shape[0]} realizations")
    scores = np.empty(len(components))
    for t, (means, covs) in enumerate(components):
        means, covs = np.asarray(means), np.asarray(covs)
        y = realized[t]
        if scope is not None:
            idx = list(scope)
            means, covs = means[:, idx], covs[:, idx][:, :, idx]
            if y.shape[0] != len(idx):
                y = y[idx]
        scores[t] = mixture_log_score(means, covs, y)
    return scores


def t_log_score(predictive: PredictiveT, realized: np.ndarray, scope: Optional[Sequence[int]] = None) -> float:
    """Closed-form one-step log score under the multivariate t predictive"""
    idx = list(range(len(predictive.mean))) if scope is None else list(scope)
    realized = np.asarray(realized, dtype=float).reshape(-1)
    if realized.shape[0] != len(idx):
        realized = realized[idx]
    dist = multivariate_t(loc=predictive.mean[idx], shape=predictive.scale[np.ix_(idx, idx)], df=predictive.dof)
    return float(dist.logpdf(realized))


@dataclass(frozen=True)
class LossMatrix:
    """Per-origin losses of several models on common origins (lower is better)"""
    values: np.ndarray  # (origins, models)
    models: Tuple[str, ...]
    origins: Tuple[str, ...]
    horizon: int
    scope: str
    kind: LossKind = LossKind.SQUARED_ERROR

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape != (len(self.origins), len(self.models)):
            raise ShapeMismatch(f"loss values {values.shape} vs {len(self.origins)} origins x {len(self.models)} models")
        if not np.all(np.isfinite(values)):
            raise ShapeMismatch("loss matrix has non-finite entries")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "origins", tuple(self.origins))
        object.__setattr__(self, "kind", LossKind(self.kind))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, model: str) -> np.ndarray:
        return self.values[:, self.models.index(model)]

    def differential(self, model: str, benchmark: str) -> np.ndarray:
        return self.column(model) - self.column(benchmark)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=pd.Index(self.origins, name="origin"), columns=list(self.models))
