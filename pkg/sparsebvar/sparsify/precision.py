"""Sparsification of drawn precision matrices.

The penalized objective is

    F(Omega) = tr(Omega Sigma) - log det Omega + sum_{i != j} rho_ij |omega_ij|,
    rho_ij = varpi / |p_ij|^(kappa / 2),  P = Sigma^{-1},

handled as one soft-threshold problem per off-diagonal pair.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from sparsebvar.errors import NotPositiveDefinite, NumericalFailure, ShapeMismatch, tags_operation
from sparsebvar.model.posterior import PosteriorDraw
from sparsebvar.model.var_core import CovMatrix
from sparsebvar.runner.manager import run_tasks

logger = logging.getLogger(__name__)

REPAIR_MARGIN = 1e-8


class PrecisionMode(Enum):
    ONE_SWEEP = "one_sweep"
    ITERATE_TO_TOL = "iterate_to_tol"


class ThresholdRule(Enum):
    # sign(p) (|p| - rho)_+
    SOFT = "soft"
    # exact minimizer of F in one pair, others held at P
    EXACT = "exact"


class PdRepair(Enum):
    DIAG_INFLATE = "diag_inflate"
    REJECT = "reject"


@dataclass(frozen=True)
class PrecisionConfig:
    varpi: float = 0.1
    kappa_prec: float = 2.0
    mode: PrecisionMode = PrecisionMode.ONE_SWEEP
    threshold: ThresholdRule = ThresholdRule.SOFT
    tol: float = 1e-8
    max_iter: int = 500
    pd_repair: PdRepair = PdRepair.DIAG_INFLATE

    def __post_init__(self):
        if self.varpi < 0:
            raise ValueError(f"varpi must be >= 0, got {self.varpi}")
        if self.kappa_prec < 1:
            raise ValueError(f"kappa_prec must be >= 1, got {self.kappa_prec}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        object.__setattr__(self, "mode", PrecisionMode(self.mode))
        object.__setattr__(self, "threshold", ThresholdRule(self.threshold))
        object.__setattr__(self, "pd_repair", PdRepair(self.pd_repair))


@dataclass(frozen=True)
class SparsePrecision:
    omega: np.ndarray
    zero_mask: np.ndarray
    repaired: bool = False
    iterations: int = 1

    def covariance(self) -> CovMatrix:
        return CovMatrix.from_precision(self.omega)


def _offdiag_zero_mask(omega: np.ndarray) -> np.ndarray:
    mask = omega == 0.0
    np.fill_diagonal(mask, False)
    return mask


def precision_penalties(P: np.ndarray, varpi: float, kappa_prec: float) -> np.ndarray:
    """rho_ij for i != j (diagonal 0); zero precision entries get +inf"""
    if varpi == 0.0:
        rho = np.zeros_like(P)
    else:
        magnitude = np.abs(P) ** (0.5 * kappa_prec)
        with np.errstate(divide="ignore"):
            rho = varpi / magnitude
    np.fill_diagonal(rho, 0.0)
    return rho


def precision_objective(omega: np.ndarray, sigma: np.ndarray, rho: np.ndarray) -> float:
    """F(Omega); +inf outside the positive-definite cone"""
    try:
        chol = linalg.cholesky(omega, lower=True)
    except linalg.LinAlgError:
        return np.inf
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    off = ~np.eye(omega.shape[0], dtype=bool)
    with np.errstate(invalid="ignore"):
        weighted = rho * np.abs(omega)
    penalty = np.where(off & (omega != 0.0), weighted, 0.0)
    return float(np.sum(omega * sigma)) - log_det + float(np.sum(penalty))


def _soft(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.maximum(np.abs(values) - thresholds, 0.0)


def _pair_minimizer(p: float, s: float, a: float, rho: float) -> float:
    """Exact argmin over w = omega_ij of 2 w s - log q(w - p) + 2 rho |w|.

    q(d) = (1 + d s)^2 - d^2 a is det(P + d (e_i e_j' + e_j e_i')) / det(P),
    with s = Sigma_ij and a = Sigma_ii Sigma_jj; q is concave and positive on
    an interval around d = 0, where the objective is convex.
    """
    if not np.isfinite(rho):
        return 0.0

    def q(d):
        return (1.0 + d * s) ** 2 - d * d * a

    def objective(w):
        value = q(w - p)
        if value <= 0.0:
            return np.inf
        return 2.0 * w * s - np.log(value) + 2.0 * rho * abs(w)

    candidates = [0.0]
    for sign in (1.0, -1.0):
        c = s + rho * sign
        # c q(d) = s (1 + d s) - d a
        coeffs = (c * (s * s - a), 2.0 * c * s - s * s + a, c - s)
        if abs(coeffs[0]) > 1e-300:
            roots = np.roots(coeffs)
        elif abs(coeffs[1]) > 1e-300:
            roots = np.array([-coeffs[2] / coeffs[1]])
        else:
            roots = np.array([])
        for d in roots:
            if abs(d.imag) > 1e-12:
                continue
            w = p + float(d.real)
            if np.sign(w) == sign and q(w - p) > 0.0:
                candidates.append(w)
    values = [objective(w) for w in candidates]
    return candidates[int(np.argmin(values))]


def _one_sweep(P: np.ndarray, sigma: np.ndarray, rho: np.ndarray, rule: ThresholdRule) -> np.ndarray:
    m = P.shape[0]
    omega = P.copy()
    rows, cols = np.triu_indices(m, k=1)
    if rule is ThresholdRule.SOFT:
        values = _soft(P[rows, cols], rho[rows, cols])
    else:
        values = np.array([
            _pair_minimizer(P[i, j], sigma[i, j], sigma[i, i] * sigma[j, j], rho[i, j])
            for i, j in zip(rows, cols)
        ])
    omega[rows, cols] = values
    omega[cols, rows] = values
    return omega


def _repair(omega: np.ndarray, policy: PdRepair) -> Tuple[np.ndarray, bool]:
    try:
        linalg.cholesky(omega, lower=True)
        return omega, False
    except linalg.LinAlgError:
        pass
    if policy is PdRepair.REJECT:
        raise NotPositiveDefinite("thresholded precision matrix lost positive definiteness")
    mu_min = float(np.min(linalg.eigvalsh(omega)))
    repaired = omega + (abs(mu_min) + REPAIR_MARGIN) * np.eye(omega.shape[0])
    try:
        linalg.cholesky(repaired, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalFailure(f"diagonal inflation did not restore positive definiteness: {exc}") from exc
    return repaired, True


def _proximal_gradient(omega: np.ndarray, sigma: np.ndarray, rho: np.ndarray,
                       tol: float, max_iter: int) -> Tuple[np.ndarray, int]:
    """Proximal-gradient iterations with backtracking; F never increases"""
    off = ~np.eye(omega.shape[0], dtype=bool)
    step = 1.0
    current = precision_objective(omega, sigma, rho)
    for iteration in range(1, max_iter + 1):
        inverse = linalg.cho_solve((linalg.cholesky(omega, lower=True), True), np.eye(omega.shape[0]))
        gradient = sigma - 0.5 * (inverse + inverse.T)

        accepted = False
        for _ in range(60):
            candidate = omega - step * gradient
            candidate = np.where(off, _soft(candidate, step * rho), candidate)
            candidate = 0.5 * (candidate + candidate.T)
            value = precision_objective(candidate, sigma, rho)
            if value <= current:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return omega, iteration

        change = float(np.max(np.abs(candidate - omega)))
        omega, current = candidate, value
        step = min(2.0 * step, 1.0)
        if change < tol:
            return omega, iteration
    return omega, max_iter


@tags_operation("precision.sparsify_precision")
def sparsify_precision(cov_draw: CovMatrix, cfg: PrecisionConfig) -> SparsePrecision:
    sigma = np.array(cov_draw.sigma)
    try:
        P = cov_draw.precision()
    except linalg.LinAlgError as exc:
        raise NumericalFailure(f"precision inversion failed: {exc}") from exc
    P = 0.5 * (P + P.T)

    if cfg.varpi == 0.0:
        return SparsePrecision(omega=P, zero_mask=np.zeros_like(P, dtype=bool))

    rho = precision_penalties(P, cfg.varpi, cfg.kappa_prec)
    omega, repaired = _repair(_one_sweep(P, sigma, rho, cfg.threshold), cfg.pd_repair)

    iterations = 1
    if cfg.mode is PrecisionMode.ITERATE_TO_TOL:
        omega, extra = _proximal_gradient(omega, sigma, rho, cfg.tol, cfg.max_iter)
        iterations += extra

    return SparsePrecision(omega=omega, zero_mask=_offdiag_zero_mask(omega),
                           repaired=repaired, iterations=iterations)


def edge_inclusion_frequencies(sparse: Sequence[SparsePrecision]) -> np.ndarray:
    counts = sum((~item.zero_mask).astype(float) for item in sparse)
    return np.asarray(counts) / len(sparse)


@tags_operation("precision.sparsify_precision_chain")
def sparsify_precision_chain(
    draws: Sequence[PosteriorDraw],
    cfg: PrecisionConfig,
    workers: int = 1,
) -> Tuple[List[SparsePrecision], np.ndarray]:
    """Per-draw sparsification; failures are collected with their draw indices"""
    if len(draws) == 0:
        raise ShapeMismatch("no draws to sparsify")
    sparse = run_tasks(lambda draw: sparsify_precision(draw.cov, cfg), draws,
                       workers=workers, label="precision draw")
    repaired = sum(item.repaired for item in sparse)
    if repaired:
        logger.info(f"Positive-definiteness repair applied to {repaired}/{len(sparse)} precision draws")
    return sparse, edge_inclusion_frequencies(sparse)


def sparse_covariances(sparse: Sequence[SparsePrecision]) -> List[CovMatrix]:
    return [item.covariance() for item in sparse]


def resolve_varpi(varpi: Optional[float], lam: float) -> float:
    """Precision penalty tied to the coefficient penalty (varpi = lambda / 10) unless given"""
    return lam / 10.0 if varpi is None else float(varpi)
