"""h-step forecasts from posterior draws.

Every draw contributes simulated paths (for point forecasts and PIT draws)
and its exact Gaussian conditional mean and covariance at each horizon
(for mixture density scores), computed with the draw's coefficients held fixed.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from sparsebvar.errors import ShapeMismatch, tags_operation
from sparsebvar.model.posterior import PosteriorDraw
from sparsebvar.model.var_core import CovMatrix, VarCoefficients
from sparsebvar.sparsify.precision import SparsePrecision
from sparsebvar.sparsify.savs import SparsifiedDraw
from sparsebvar.utils import derive_rng

logger = logging.getLogger(__name__)

DEFAULT_HORIZONS: Tuple[int, ...] = (1, 4, 8)


@dataclass(frozen=True)
class ForecastDraw:
    coeffs: VarCoefficients
    cov: CovMatrix


@dataclass
class ForecastRun:
    origin: str
    horizons: Tuple[int, ...]
    names: Tuple[str, ...]
    paths: np.ndarray  # (R * sims, H, m), H = max horizon
    density_indices: Tuple[int, ...]
    cond_means: np.ndarray  # (R, len(horizons), d)
    cond_covs: np.ndarray  # (R, len(horizons), d, d)
    draws_per_posterior: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def point(self) -> np.ndarray:
        """H x m mean of the simulated paths"""
        return self.paths.mean(axis=0)

    def horizon_position(self, h: int) -> int:
        try:
            return self.horizons.index(h)
        except ValueError:
            raise ShapeMismatch(f"horizon {h} not in {self.horizons}") from None

    def point_at(self, h: int) -> np.ndarray:
        return self.paths[:, h - 1, :].mean(axis=0)

    def path_draws(self, h: int, variable: int) -> np.ndarray:
        return self.paths[:, h - 1, variable]

    def components(self, h: int, variables: Optional[Sequence[int]] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Mixture components (means, covariances) at horizon h for a subset of the density variables"""
        k = self.horizon_position(h)
        if variables is None:
            sub = list(range(len(self.density_indices)))
        else:
            try:
                sub = [self.density_indices.index(v) for v in variables]
            except ValueError:
                raise ShapeMismatch(f"variables {list(variables)} not all stored for density scoring") from None
        means = self.cond_means[:, k][:, sub]
        covs = self.cond_covs[:, k][:, sub][:, :, sub]
        return means, covs


@tags_operation("forecast.compose_draws")
def compose_draws(
    draws: Sequence[PosteriorDraw],
    sparse_coeffs: Optional[Sequence[SparsifiedDraw]] = None,
    sparse_precisions: Optional[Sequence[SparsePrecision]] = None,
) -> List[ForecastDraw]:
    """Pair each draw's (sparsified) coefficients with its (sparsified) covariance"""
    for label, items in (("coefficient", sparse_coeffs), ("precision", sparse_precisions)):
        if items is not None and len(items) != len(draws):
            raise ShapeMismatch(f"{len(items)} sparse {label} draws for {len(draws)} posterior draws")
    composed = []
    for r, draw in enumerate(draws):
        coeffs = draw.coeffs if sparse_coeffs is None else sparse_coeffs[r].coeffs_sparse
        cov = draw.cov if sparse_precisions is None else sparse_precisions[r].covariance()
        composed.append(ForecastDraw(coeffs=coeffs, cov=cov))
    return composed


def _impulse_responses(coeffs: VarCoefficients, H: int) -> List[np.ndarray]:
    """Psi_0 = I, Psi_i = sum_l A_l Psi_{i-l}"""
    lags = [coeffs.lag_matrix(l) for l in range(1, coeffs.p + 1)]
    psi = [np.eye(coeffs.m)]
    for i in range(1, H):
        psi.append(sum(lags[l - 1] @ psi[i - l] for l in range(1, min(i, coeffs.p) + 1)))
    return psi


def conditional_moments(
    draw: ForecastDraw,
    history: np.ndarray,
    horizons: Sequence[int],
    indices: Sequence[int],
) -> Tuple[np.ndarray, np.ndarray]:
    """Conditional mean and covariance of y_{T+h} given the draw, for h in horizons"""
    coeffs = draw.coeffs
    H = max(horizons)
    lag_block = np.array(coeffs.A[:-1])
    recent = [row for row in np.asarray(history, dtype=float)[-coeffs.p:]]

    means = []
    for _ in range(H):
        state = np.concatenate(recent[::-1][:coeffs.p])
        nxt = state @ lag_block + coeffs.intercept
        means.append(nxt)
        recent.append(nxt)

    idx = list(indices)
    factor = draw.cov.chol
    psi = _impulse_responses(coeffs, H)
    step_covs, running = [], np.zeros((len(idx), len(idx)))
    for i in range(H):
        rows = psi[i][idx] @ factor
        running = running + rows @ rows.T
        step_covs.append(running)

    out_means = np.array([means[h - 1][idx] for h in horizons])
    out_covs = np.array([step_covs[h - 1] for h in horizons])
    return out_means, out_covs


@tags_operation("forecast.simulate_forecast")
def simulate_forecast(
    draws: Sequence[ForecastDraw],
    last_p_obs: np.ndarray,
    horizons: Sequence[int] = DEFAULT_HORIZONS,
    sims_per_draw: int = 1,
    seed: int = 0,
    density_indices: Optional[Sequence[int]] = None,
    names: Optional[Sequence[str]] = None,
    origin: str = "",
) -> ForecastRun:
    if len(draws) == 0:
        raise ShapeMismatch("no draws to forecast from")
    horizons = tuple(sorted(set(int(h) for h in horizons)))
    if not horizons or horizons[0] < 1:
        raise ShapeMismatch(f"horizons must be >= 1, got {horizons}")
    m, p = draws[0].coeffs.m, draws[0].coeffs.p
    history = np.asarray(last_p_obs, dtype=float)
    if history.ndim != 2 or history.shape[1] != m or history.shape[0] < p:
        raise ShapeMismatch(f"need at least {p} rows of {m} variables, got {history.shape}")
    history = history[-p:]
    H = horizons[-1]
    density_indices = tuple(range(m)) if density_indices is None else tuple(int(i) for i in density_indices)
    names = tuple(names) if names is not None else tuple(f"y{i + 1}" for i in range(m))

    paths = np.empty((len(draws) * sims_per_draw, H, m))
    cond_means = np.empty((len(draws), len(horizons), len(density_indices)))
    cond_covs = np.empty((len(draws), len(horizons), len(density_indices), len(density_indices)))

    for r, draw in enumerate(draws):
        rng = derive_rng(seed, r)
        lag_block = np.array(draw.coeffs.A[:-1])
        intercept = draw.coeffs.intercept
        shocks = rng.standard_normal((sims_per_draw, H, m)) @ draw.cov.chol.T

        window = np.broadcast_to(history, (sims_per_draw, p, m)).copy()
        block = paths[r * sims_per_draw:(r + 1) * sims_per_draw]
        for step in range(H):
            state = window[:, ::-1, :].reshape(sims_per_draw, p * m)
            nxt = state @ lag_block + intercept + shocks[:, step, :]
            block[:, step, :] = nxt
            window = np.concatenate([window[:, 1:, :], nxt[:, None, :]], axis=1)

        cond_means[r], cond_covs[r] = conditional_moments(draw, history, horizons, density_indices)

    return ForecastRun(
        origin=str(origin),
        horizons=horizons,
        names=names,
        paths=paths,
        density_indices=density_indices,
        cond_means=cond_means,
        cond_covs=cond_covs,
        draws_per_posterior=len(draws),
    )
