"""Closed-form conjugate posterior, marginal likelihood and posterior sampling"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.special import multigammaln
from scipy.stats import invwishart

from sparsebvar.config.settings import settings
from sparsebvar.errors import (
    DofTooSmall,
    NumericalFailure,
    ShapeMismatch,
    SingularGram,
    SingularPrior,
    tags_operation,
)
from sparsebvar.model.minnesota import (
    DummyObservations,
    MinnesotaHyper,
    PriorMoments,
    ScaleEstimates,
    build_dummies,
    estimate_scales,
    implied_prior_moments,
)
from sparsebvar.model.var_core import (
    CovMatrix,
    LagDesign,
    TimeSeriesPanel,
    VarCoefficients,
    build_lag_design,
)
from sparsebvar.runner.manager import run_tasks
from sparsebvar.utils import derive_seed

logger = logging.getLogger(__name__)

# Hyperparameter grid searched by marginal likelihood
THETA1_GRID: Tuple[float, ...] = (
    0.01, 0.025, 0.050, 0.075, 0.10, 0.125, 0.15, 0.20, 0.25,
    0.30, 0.35, 0.40, 0.45, 0.50, 0.75, 1.0, 2.0, 5.0,
)


@dataclass(frozen=True)
class PosteriorMoments:
    a_bar: np.ndarray
    v_bar: np.ndarray
    s1_scale: np.ndarray
    s1_dof: float

    @property
    def n(self) -> int:
        return self.a_bar.shape[0]

    @property
    def m(self) -> int:
        return self.a_bar.shape[1]

    @property
    def p(self) -> int:
        return (self.n - 1) // self.m

    @cached_property
    def v_chol(self) -> np.ndarray:
        return _cholesky(self.v_bar, "posterior row covariance V_bar")

    @cached_property
    def s1_inv(self) -> np.ndarray:
        inverse = linalg.cho_solve((_cholesky(self.s1_scale, "posterior scale S1"), True), np.eye(self.m))
        return 0.5 * (inverse + inverse.T)

    def coefficients(self) -> VarCoefficients:
        return VarCoefficients(self.a_bar, self.m, self.p)

    def sigma_mean(self) -> np.ndarray:
        """Posterior mean of Sigma, S1 / (s1 - m - 1)"""
        return self.s1_scale / (self.s1_dof - self.m - 1)


@dataclass(frozen=True)
class PosteriorDraw:
    coeffs: VarCoefficients
    cov: CovMatrix
    draw_index: int
    rng_seed: int


@dataclass(frozen=True)
class PredictiveT:
    """One-step predictive Student-t: variance = scale * dof / (dof - 2)"""
    mean: np.ndarray
    scale: np.ndarray
    dof: float
    variance: np.ndarray
    exact_variance: Optional[np.ndarray] = field(default=None)


@dataclass(frozen=True)
class ConjugateFit:
    """Posterior of one model specification, with the theta1 it was built from"""
    theta1: float
    log_ml: float
    moments: PosteriorMoments
    scales: ScaleEstimates
    design: LagDesign
    grid: List[Tuple[float, float]] = field(default_factory=list)


def _cholesky(matrix: np.ndarray, label: str) -> np.ndarray:
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalFailure(f"Cholesky factorization of {label} failed: {exc}") from exc


def _log_det_pd(matrix: np.ndarray, label: str) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(_cholesky(matrix, label)))))


def _solve_gram(gram: np.ndarray, rhs: np.ndarray):
    limit = settings.GRAM_CONDITION_LIMIT
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > limit:
        raise SingularGram(f"Gram matrix condition number {cond:.3g} exceeds {limit:.3g}")
    try:
        factor = linalg.cho_factor(gram, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularGram(f"Gram matrix is not positive definite: {exc}") from exc
    return factor, linalg.cho_solve(factor, rhs)


@tags_operation("posterior.posterior_moments")
def posterior_moments(design: LagDesign, dummies: DummyObservations, s0: float) -> PosteriorMoments:
    """Theil-Goldberger update: OLS on the data stacked over the dummy rows"""
    X = np.vstack([design.X, dummies.x_dummy])
    Y = np.vstack([design.Y, dummies.y_dummy])
    factor, a_bar = _solve_gram(X.T @ X, X.T @ Y)
    v_bar = linalg.cho_solve(factor, np.eye(X.shape[1]))

    resid = Y - X @ a_bar
    s1 = resid.T @ resid
    return PosteriorMoments(
        a_bar=a_bar,
        v_bar=0.5 * (v_bar + v_bar.T),
        s1_scale=0.5 * (s1 + s1.T),
        s1_dof=float(design.T + s0),
    )


@tags_operation("posterior.general_form_moments")
def general_form_moments(design: LagDesign, prior: PriorMoments) -> PosteriorMoments:
    """Natural-conjugate update written directly in terms of (A0, V0, S0, s0)"""
    X, Y = design.X, design.Y
    try:
        prior_factor = linalg.cho_factor(prior.v0, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularPrior(f"prior row covariance is not positive definite: {exc}") from exc
    prior_precision = linalg.cho_solve(prior_factor, np.eye(prior.v0.shape[0]))
    prior_precision = 0.5 * (prior_precision + prior_precision.T)

    gram = X.T @ X + prior_precision
    factor, a_bar = _solve_gram(gram, X.T @ Y + prior_precision @ prior.a0)
    v_bar = linalg.cho_solve(factor, np.eye(gram.shape[0]))

    s1 = prior.s0_scale + Y.T @ Y + prior.a0.T @ prior_precision @ prior.a0 - a_bar.T @ gram @ a_bar
    return PosteriorMoments(
        a_bar=a_bar,
        v_bar=0.5 * (v_bar + v_bar.T),
        s1_scale=0.5 * (s1 + s1.T),
        s1_dof=float(design.T + prior.s0_dof),
    )


@tags_operation("posterior.log_marginal_likelihood")
def log_marginal_likelihood(design: LagDesign, dummies: DummyObservations, s0: float) -> float:
    """log p(Y | delta) of the matrix-normal inverse-Wishart model"""
    m = design.m
    prior = implied_prior_moments(dummies, MinnesotaHyper(theta1=1.0, s0=s0))
    post = posterior_moments(design, dummies, s0)
    T = design.T

    log_ml = (
        -0.5 * T * m * np.log(np.pi)
        + 0.5 * m * (_log_det_pd(post.v_bar, "V_bar") - _log_det_pd(prior.v0, "V0"))
        + 0.5 * s0 * _log_det_pd(prior.s0_scale, "S0")
        - 0.5 * post.s1_dof * _log_det_pd(post.s1_scale, "S1")
        + multigammaln(0.5 * post.s1_dof, m)
        - multigammaln(0.5 * s0, m)
    )
    return float(log_ml)


@tags_operation("posterior.grid_search_theta")
def grid_search_theta(
    panel: TimeSeriesPanel,
    p: int,
    grid: Sequence[float],
    hyper: MinnesotaHyper,
) -> Tuple[float, List[Tuple[float, float]]]:
    """Marginal-likelihood maximizing theta1 over `grid`; ties go to the smaller theta1"""
    if len(grid) == 0:
        raise ValueError("theta1 grid is empty")
    if any(theta <= 0 for theta in grid):
        raise ValueError("theta1 grid values must be positive")

    design = build_lag_design(panel, p)
    scales = estimate_scales(panel, p)
    s0 = hyper.prior_dof(panel.m)

    table = []
    for theta in grid:
        dummies = build_dummies(hyper.with_theta1(theta), scales, panel.m, p)
        table.append((float(theta), log_marginal_likelihood(design, dummies, s0)))

    best_theta, best_value = table[0]
    for theta, value in table[1:]:
        if value > best_value or (value == best_value and theta < best_theta):
            best_theta, best_value = theta, value

    logger.debug("theta1 grid search", extra={"best_theta1": best_theta, "log_ml": best_value})
    return best_theta, table


@tags_operation("posterior.fit_conjugate")
def fit_conjugate(
    panel: TimeSeriesPanel,
    p: int,
    hyper: MinnesotaHyper,
    grid: Optional[Sequence[float]] = None,
) -> ConjugateFit:
    """Posterior at hyper.theta1, or at the grid-ML optimum when `grid` is given"""
    table: List[Tuple[float, float]] = []
    if grid:
        theta1, table = grid_search_theta(panel, p, grid, hyper)
        hyper = hyper.with_theta1(theta1)

    design = build_lag_design(panel, p)
    scales = estimate_scales(panel, p)
    s0 = hyper.prior_dof(panel.m)
    dummies = build_dummies(hyper, scales, panel.m, p)
    moments = posterior_moments(design, dummies, s0)
    log_ml = dict(table).get(hyper.theta1)
    if log_ml is None:
        log_ml = log_marginal_likelihood(design, dummies, s0)
    return ConjugateFit(
        theta1=hyper.theta1,
        log_ml=log_ml,
        moments=moments,
        scales=scales,
        design=design,
        grid=table,
    )


def _draw_one(moments: PosteriorMoments, sigma_dist, seed: int, index: int) -> PosteriorDraw:
    draw_seed = derive_seed(seed, index)
    rng = np.random.default_rng(draw_seed)
    sigma = np.atleast_2d(sigma_dist.rvs(random_state=rng))
    cov = CovMatrix(0.5 * (sigma + sigma.T))

    G = rng.standard_normal((moments.n, moments.m))
    A = moments.a_bar + moments.v_chol @ G @ cov.chol.T
    return PosteriorDraw(
        coeffs=VarCoefficients(A, moments.m, moments.p),
        cov=cov,
        draw_index=index,
        rng_seed=draw_seed,
    )


@tags_operation("posterior.sample_posterior")
def sample_posterior(moments: PosteriorMoments, R: int, seed: int, workers: int = 1) -> List[PosteriorDraw]:
    """R independent (A, Sigma) draws; draw r uses a stream derived from (seed, r) only"""
    if R < 1:
        raise ValueError(f"draw count must be >= 1, got {R}")
    # Factor once so failures surface before dispatch
    _ = moments.v_chol
    _cholesky(moments.s1_scale, "posterior scale S1")
    # Bartlett construction on S1^{-1}, inverted
    sigma_dist = invwishart(df=moments.s1_dof, scale=moments.s1_scale)

    chunk = max(1, -(-R // max(1, 4 * max(workers, 1))))
    chunks = [range(start, min(start + chunk, R)) for start in range(0, R, chunk)]

    def draw_chunk(indices: range) -> List[PosteriorDraw]:
        return [_draw_one(moments, sigma_dist, seed, index) for index in indices]

    results = run_tasks(draw_chunk, chunks, workers=workers, label="posterior draw")
    return [draw for block in results for draw in block]


@tags_operation("posterior.one_step_predictive")
def one_step_predictive(moments: PosteriorMoments, x_next: np.ndarray) -> PredictiveT:
    x_next = np.asarray(x_next, dtype=float).reshape(-1)
    if x_next.shape[0] != moments.n:
        raise ShapeMismatch(f"x_next has length {x_next.shape[0]}, expected {moments.n}")
    if x_next[-1] != 1.0:
        raise ShapeMismatch("x_next must end with the intercept entry 1")
    s1 = moments.s1_dof
    if s1 <= 2:
        raise DofTooSmall(f"predictive variance needs s1 > 2, got {s1}")

    quad = float(x_next @ moments.v_bar @ x_next)
    spread = (1.0 + quad) * moments.s1_scale
    exact = spread / (s1 - moments.m - 1) if s1 > moments.m + 1 else None
    return PredictiveT(
        mean=moments.a_bar.T @ x_next,
        scale=spread / s1,
        dof=s1,
        variance=spread / (s1 - 2.0),
        exact_variance=exact,
    )
