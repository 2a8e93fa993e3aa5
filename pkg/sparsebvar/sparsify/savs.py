"""Signal adaptive variable selection on VAR coefficient draws.

Each coefficient a_c (row c of A, equation j) is replaced by

    a*_c = sign(a_c) * (|a_c| * ||X_c||^2 - kappa_c)_+ / ||X_c||^2,  kappa_c = lambda_c / |a_c|^zeta

which is one coordinate-descent sweep of 0.5 * ||Z (a - alpha)||^2 + sum_c kappa_c |alpha_c|
started at the draw. Because Z = I_m (x) X only the squared norm of the X column matters.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from sparsebvar.errors import ShapeMismatch, tags_operation
from sparsebvar.model.posterior import PosteriorDraw
from sparsebvar.model.var_core import LagDesign, VarCoefficients
from sparsebvar.runner.manager import run_tasks

logger = logging.getLogger(__name__)


class SavsScheme(Enum):
    PLAIN = "plain"
    LAG_WISE = "lag_wise"


@dataclass(frozen=True)
class SavsConfig:
    lam: float = 1.0
    zeta: float = 2.0
    scheme: SavsScheme = SavsScheme.LAG_WISE
    sparsify_intercept: bool = False
    sparsify_first_own_lag: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.zeta < 1:
            raise ValueError(f"zeta must be >= 1, got {self.zeta}")
        object.__setattr__(self, "scheme", SavsScheme(self.scheme))


@dataclass(frozen=True)
class ColumnNorms:
    norms_sq: np.ndarray


@dataclass(frozen=True)
class SparsifiedDraw:
    coeffs_sparse: VarCoefficients
    zero_mask: np.ndarray

    @classmethod
    def from_matrix(cls, A: np.ndarray, m: int, p: int) -> "SparsifiedDraw":
        coeffs = VarCoefficients(A, m, p)
        return cls(coeffs_sparse=coeffs, zero_mask=np.asarray(coeffs.A == 0.0))


@tags_operation("savs.column_norms")
def column_norms(design: LagDesign) -> ColumnNorms:
    if design.X.shape[0] == 0:
        raise ShapeMismatch("design has no rows")
    return ColumnNorms(np.einsum("tc,tc->c", design.X, design.X))


def penalty_lambda(l: int, i: int, j: int, cfg: SavsConfig) -> float:
    """Penalty on the lag-l coefficient of variable i in equation j"""
    own = i == j
    if l == 1 and own and not cfg.sparsify_first_own_lag:
        return 0.0
    if cfg.scheme is SavsScheme.LAG_WISE:
        return cfg.lam * ((l - 1) ** 2 if own else l ** 2)
    return cfg.lam


def penalty_matrix(m: int, p: int, cfg: SavsConfig) -> np.ndarray:
    """n x m matrix of penalties laid out like A; the intercept row is 0 unless sparsified"""
    n = m * p + 1
    penalties = np.empty((n, m))
    own = np.eye(m, dtype=bool)
    for l in range(1, p + 1):
        block = slice((l - 1) * m, l * m)
        if cfg.scheme is SavsScheme.LAG_WISE:
            penalties[block] = np.where(own, cfg.lam * (l - 1) ** 2, cfg.lam * l ** 2)
        else:
            penalties[block] = cfg.lam
        if l == 1 and not cfg.sparsify_first_own_lag:
            penalties[block][own] = 0.0
    penalties[-1] = cfg.lam if cfg.sparsify_intercept else 0.0
    return penalties


def passthrough_mask(m: int, p: int, cfg: SavsConfig) -> np.ndarray:
    """Positions copied unchanged from the draw"""
    mask = np.zeros((m * p + 1, m), dtype=bool)
    if not cfg.sparsify_intercept:
        mask[-1] = True
    if not cfg.sparsify_first_own_lag:
        mask[:m][np.eye(m, dtype=bool)] = True
    return mask


def adaptive_kappa(A: np.ndarray, penalties: np.ndarray, zeta: float) -> np.ndarray:
    """kappa = lambda / |a|^zeta, +inf for penalized zeros and 0 wherever lambda = 0"""
    magnitude = np.abs(A) ** zeta
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = penalties / magnitude
    kappa = np.where(penalties == 0.0, 0.0, kappa)
    return np.where((magnitude == 0.0) & (penalties > 0.0), np.inf, kappa)


def _savs_kernel(A: np.ndarray, norms_sq: np.ndarray, penalties: np.ndarray,
                 zeta: float, keep: np.ndarray) -> np.ndarray:
    norms = np.broadcast_to(norms_sq[:, None], A.shape)
    kappa = adaptive_kappa(A, penalties, zeta)
    with np.errstate(divide="ignore", invalid="ignore"):
        shrunk = np.sign(A) * np.maximum(np.abs(A) * norms - kappa, 0.0) / norms
    shrunk = np.where(norms == 0.0, 0.0, shrunk)
    shrunk = np.where(np.isfinite(shrunk), shrunk, 0.0)
    shrunk = np.where(A == 0.0, 0.0, shrunk)
    # lambda = 0 and excluded positions are returned bit-identical
    return np.where(keep | (penalties == 0.0), A, shrunk)


@tags_operation("savs.savs_draw")
def savs_draw(a_draw: VarCoefficients, norms: ColumnNorms, cfg: SavsConfig) -> SparsifiedDraw:
    m, p = a_draw.m, a_draw.p
    if norms.norms_sq.shape[0] != a_draw.n:
        raise ShapeMismatch(f"{norms.norms_sq.shape[0]} column norms for n={a_draw.n}")
    A = np.array(a_draw.A)
    sparse = _savs_kernel(A, norms.norms_sq, penalty_matrix(m, p, cfg), cfg.zeta, passthrough_mask(m, p, cfg))
    return SparsifiedDraw.from_matrix(sparse, m, p)


@tags_operation("savs.savs_point")
def savs_point(point_estimate: VarCoefficients, norms: ColumnNorms, cfg: SavsConfig) -> SparsifiedDraw:
    """SAVS of a single point estimate such as the posterior median"""
    return savs_draw(point_estimate, norms, cfg)


def inclusion_frequencies(sparse_draws: Sequence[SparsifiedDraw]) -> np.ndarray:
    counts = sum((~draw.zero_mask).astype(float) for draw in sparse_draws)
    return np.asarray(counts) / len(sparse_draws)


@tags_operation("savs.sparsify_chain")
def sparsify_chain(
    draws: Sequence[PosteriorDraw],
    norms: ColumnNorms,
    cfg: SavsConfig,
    workers: int = 1,
) -> Tuple[List[SparsifiedDraw], np.ndarray]:
    if len(draws) == 0:
        raise ShapeMismatch("no draws to sparsify")
    sparse = run_tasks(lambda draw: savs_draw(draw.coeffs, norms, cfg), draws,
                       workers=workers, label="savs draw")
    freq = inclusion_frequencies(sparse)
    logger.debug("Sparsified coefficient chain", extra={
        "draws": len(draws), "mean_inclusion": float(freq.mean())
    })
    return sparse, freq


def gram_matrix(design: LagDesign) -> np.ndarray:
    return design.X.T @ design.X


def coefficient_objective(alpha: np.ndarray, a_hat: np.ndarray, gram: np.ndarray, kappa: np.ndarray) -> float:
    """0.5 * ||X (a_hat - alpha)||^2 summed over equations plus the weighted l1 penalty"""
    diff = a_hat - alpha
    fit = 0.5 * float(np.einsum("cj,cd,dj->", diff, gram, diff))
    weighted = np.where(alpha == 0.0, 0.0, kappa * np.abs(alpha))
    return fit + float(np.sum(weighted))


@tags_operation("savs.coordinate_descent")
def coordinate_descent(
    a_draw: VarCoefficients,
    gram: np.ndarray,
    cfg: SavsConfig,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> SparsifiedDraw:
    """Coordinate descent on the full (non-separable) objective, run to convergence.

    Starts at the draw with the same adaptive penalties as savs_draw. Every
    equation shares the Gram matrix X'X, so each coordinate update is
    vectorized across equations.
    """
    m, p = a_draw.m, a_draw.p
    a_hat = np.array(a_draw.A)
    if gram.shape != (a_draw.n, a_draw.n):
        raise ShapeMismatch(f"Gram matrix shape {gram.shape} does not match n={a_draw.n}")

    kappa = adaptive_kappa(a_hat, penalty_matrix(m, p, cfg), cfg.zeta)
    alpha = a_hat.copy()
    diag = np.diag(gram)

    for sweep in range(1, max_iter + 1):
        largest_change = 0.0
        for c in range(a_draw.n):
            if diag[c] == 0.0:
                new = np.where(kappa[c] > 0.0, 0.0, alpha[c])
            else:
                resid = gram[c] @ (alpha - a_hat) - diag[c] * (alpha[c] - a_hat[c])
                target = diag[c] * a_hat[c] - resid
                with np.errstate(invalid="ignore"):
                    new = np.sign(target) * np.maximum(np.abs(target) - kappa[c], 0.0) / diag[c]
                new = np.where(np.isfinite(new), new, 0.0)
            largest_change = max(largest_change, float(np.max(np.abs(new - alpha[c]))))
            alpha[c] = new
        if largest_change < tol:
            break
    else:
        logger.warning(f"Coordinate descent stopped at max_iter={max_iter} (change {largest_change:.3g})")

    return SparsifiedDraw.from_matrix(alpha, m, p)
