"""Synthetic sparse VAR data-generating processes"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np
import pandas as pd

from sparsebvar.errors import ShapeMismatch, StabilityExhausted, TooFewObservations, tags_operation
from sparsebvar.model.var_core import CovMatrix, TimeSeriesPanel, VarCoefficients, companion_spectral_radius
from sparsebvar.utils import derive_rng

logger = logging.getLogger(__name__)

FIRST_LAG_BOOST = 0.25
LAG_DECAY = 2.0
SIGMA_DIAGONAL = 0.25
START_PERIOD = "1959Q1"


class Sparsity(Enum):
    DENSE = "dense"
    MODERATE = "moderate"
    SPARSE = "sparse"

    @property
    def zero_fraction(self) -> float:
        return {"dense": 0.1, "moderate": 0.6, "sparse": 0.9}[self.value]


def default_xi(m: int) -> float:
    if m <= 3:
        return 0.3
    if m <= 10:
        return 0.2
    return 0.1


@dataclass(frozen=True)
class DgpConfig:
    m: int = 3
    T: int = 240
    p: int = 5
    xi: Optional[float] = None
    sparsity: Union[Sparsity, float] = Sparsity.SPARSE
    seed: int = 0
    max_stability_redraws: int = 1000
    burn_in: int = 100
    lag_decay: float = LAG_DECAY

    def __post_init__(self):
        if self.m < 1 or self.p < 1:
            raise ValueError("m and p must be >= 1")
        if self.lag_decay < 0:
            raise ValueError(f"lag_decay must be >= 0, got {self.lag_decay}")
        if isinstance(self.sparsity, str):
            object.__setattr__(self, "sparsity", Sparsity(self.sparsity))
        if not 0.0 <= self.zero_fraction < 1.0:
            raise ValueError(f"zero fraction must lie in [0, 1), got {self.zero_fraction}")
        if self.xi is not None and not self.xi > 0:
            raise ValueError(f"xi must be positive, got {self.xi}")

    @property
    def zero_fraction(self) -> float:
        if isinstance(self.sparsity, Sparsity):
            return self.sparsity.zero_fraction
        return float(self.sparsity)

    @property
    def sparsity_label(self) -> str:
        if isinstance(self.sparsity, Sparsity):
            return self.sparsity.value
        return f"{self.sparsity:g}"

    @property
    def scale(self) -> float:
        return default_xi(self.m) if self.xi is None else float(self.xi)

    def with_seed(self, seed: int) -> "DgpConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class DgpTruth:
    coeffs_true: VarCoefficients
    chol_true: np.ndarray
    sigma_true: CovMatrix
    zero_mask_coeffs: np.ndarray
    zero_mask_chol: np.ndarray
    attempts: int = 1

    @classmethod
    def from_parts(cls, coeffs: VarCoefficients, chol: np.ndarray) -> "DgpTruth":
        chol = np.tril(np.asarray(chol, dtype=float))
        return cls(
            coeffs_true=coeffs,
            chol_true=chol,
            sigma_true=CovMatrix(chol @ chol.T),
            zero_mask_coeffs=np.asarray(coeffs.A == 0.0),
            zero_mask_chol=np.tril(chol == 0.0, k=-1),
        )

    @property
    def m(self) -> int:
        return self.coeffs_true.m

    @property
    def p(self) -> int:
        return self.coeffs_true.p


def _zero_positions(matrix: np.ndarray, positions: np.ndarray, fraction: float,
                    rng: np.random.Generator) -> None:
    """Zero exactly round(fraction * len(positions)) of the listed (row, col) entries in place"""
    count = int(round(fraction * len(positions)))
    if count == 0:
        return
    chosen = positions[rng.choice(len(positions), size=count, replace=False)]
    matrix[chosen[:, 0], chosen[:, 1]] = 0.0


def _draw_system(cfg: DgpConfig, rng: np.random.Generator):
    m, p, xi = cfg.m, cfg.p, cfg.scale
    off = np.argwhere(~np.eye(m, dtype=bool))
    every = np.argwhere(np.ones((m, m), dtype=bool))
    lags = []
    for j in range(1, p + 1):
        # N(0, (xi/j)^2) with the variance rescaled by 1/j^2 again for j >= 2
        A_j = rng.normal(0.0, xi / j ** cfg.lag_decay, size=(m, m))
        if j == 1:
            A_j[np.diag_indices(m)] += FIRST_LAG_BOOST
        # only the boosted first own lags are exempt from zeroing
        _zero_positions(A_j, off if j == 1 else every, cfg.zero_fraction, rng)
        lags.append(A_j)

    chol = np.diag(np.full(m, np.sqrt(SIGMA_DIAGONAL)))
    lower = np.argwhere(np.tril(np.ones((m, m), dtype=bool), k=-1))
    if len(lower):
        chol[lower[:, 0], lower[:, 1]] = rng.normal(0.0, xi, size=len(lower))
        _zero_positions(chol, lower, cfg.zero_fraction, rng)
    # rows of norm 0.5 give diag(Sigma) = 0.25 with the zero pattern intact
    chol *= np.sqrt(SIGMA_DIAGONAL) / np.linalg.norm(chol, axis=1, keepdims=True)
    return VarCoefficients.from_lags(lags), chol


@tags_operation("dgp.draw_dgp")
def draw_dgp(cfg: DgpConfig) -> DgpTruth:
    rng = derive_rng(cfg.seed, 0)
    for attempt in range(1, cfg.max_stability_redraws + 1):
        coeffs, chol = _draw_system(cfg, rng)
        if companion_spectral_radius(coeffs) < 1.0:
            return replace(DgpTruth.from_parts(coeffs, chol), attempts=attempt)
    raise StabilityExhausted(
        f"no stable system after {cfg.max_stability_redraws} draws (m={cfg.m}, p={cfg.p}, xi={cfg.scale})"
    )


def quarterly_labels(T: int, start: str = START_PERIOD) -> tuple:
    return tuple(str(period) for period in pd.period_range(start=start, periods=T, freq="Q"))


@tags_operation("dgp.simulate_series")
def simulate_series(truth: DgpTruth, T: int, burn_in: int = 100, seed: int = 0,
                    start: str = START_PERIOD) -> TimeSeriesPanel:
    m, p = truth.m, truth.p
    if T < p + 1:
        raise TooFewObservations(f"need T >= p + 1 = {p + 1}, got {T}")
    rng = derive_rng(seed, 1)
    total = burn_in + T
    shocks = rng.standard_normal((total, m)) @ truth.chol_true.T

    lag_block = np.array(truth.coeffs_true.A[:-1])
    intercept = truth.coeffs_true.intercept
    Y = np.zeros((total + p, m))
    for t in range(p, total + p):
        recent = Y[t - p:t][::-1].reshape(-1)
        Y[t] = recent @ lag_block + intercept + shocks[t - p]

    names = tuple(f"y{i + 1}" for i in range(m))
    return TimeSeriesPanel(Y[p + burn_in:], names, quarterly_labels(T, start))


def mae(estimate: np.ndarray, truth: np.ndarray) -> float:
    estimate, truth = np.asarray(estimate, dtype=float), np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise ShapeMismatch(f"estimate {estimate.shape} vs truth {truth.shape}", "dgp.mae")
    return float(np.mean(np.abs(estimate - truth)))


class CovParameterization(Enum):
    SIGMA = "sigma"
    CHOLESKY = "cholesky"
    PRECISION = "precision"


def cov_mae(estimate: np.ndarray, truth: np.ndarray,
            parameterization: CovParameterization = CovParameterization.SIGMA) -> float:
    """MAE over the lower triangle (diagonal included) of Sigma, its Cholesky factor or its inverse"""
    estimate, truth = np.asarray(estimate, dtype=float), np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise ShapeMismatch(f"estimate {estimate.shape} vs truth {truth.shape}", "dgp.cov_mae")
    parameterization = CovParameterization(parameterization)
    if parameterization is CovParameterization.CHOLESKY:
        estimate, truth = CovMatrix(estimate).chol, CovMatrix(truth).chol
    elif parameterization is CovParameterization.PRECISION:
        estimate, truth = CovMatrix(estimate).precision(), CovMatrix(truth).precision()
    rows, cols = np.tril_indices(truth.shape[0])
    return mae(estimate[rows, cols], truth[rows, cols])
