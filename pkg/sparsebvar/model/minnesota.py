"""Minnesota prior expressed as dummy observations"""
import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from sparsebvar.errors import (
    DofTooSmall,
    ShapeMismatch,
    SingularDesign,
    SingularPrior,
    TooFewObservations,
    tags_operation,
)
from sparsebvar.model.var_core import TimeSeriesPanel

logger = logging.getLogger(__name__)

DEFAULT_PI = 1e6


@dataclass(frozen=True)
class MinnesotaHyper:
    """Hyperparameters delta = (theta1, pi) plus first-own-lag means and prior dof.

    `phi` defaults to zeros and `s0` to m + 2 once the system size is known.
    """
    theta1: float
    pi: float = DEFAULT_PI
    phi: Optional[Sequence[float]] = None
    s0: Optional[float] = None

    def __post_init__(self):
        if not self.theta1 > 0:
            raise ValueError(f"theta1 must be positive, got {self.theta1}")
        if not self.pi > 0:
            raise ValueError(f"pi must be positive, got {self.pi}")
        if self.phi is not None:
            object.__setattr__(self, "phi", tuple(float(v) for v in self.phi))

    def phi_vector(self, m: int) -> np.ndarray:
        if self.phi is None:
            return np.zeros(m)
        if len(self.phi) != m:
            raise ShapeMismatch(f"phi has {len(self.phi)} entries for m={m}")
        return np.asarray(self.phi, dtype=float)

    def prior_dof(self, m: int) -> float:
        s0 = float(m + 2) if self.s0 is None else float(self.s0)
        if s0 <= m + 1:
            raise DofTooSmall(f"s0={s0} must exceed m+1={m + 1}")
        return s0

    def with_theta1(self, theta1: float) -> "MinnesotaHyper":
        return replace(self, theta1=float(theta1))


@dataclass(frozen=True)
class ScaleEstimates:
    sigma_hat: np.ndarray

    def __post_init__(self):
        sigma = np.asarray(self.sigma_hat, dtype=float).reshape(-1)
        if not np.all(sigma > 0):
            raise SingularDesign("scale estimates must be strictly positive")
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma_hat", sigma)

    @property
    def m(self) -> int:
        return self.sigma_hat.shape[0]


@dataclass(frozen=True)
class DummyObservations:
    y_dummy: np.ndarray
    x_dummy: np.ndarray
    m: int
    p: int


@dataclass(frozen=True)
class PriorMoments:
    """Prior implied by the dummies: A | Sigma ~ MN(a0, Sigma (x) v0), Sigma ~ IW(s0_dof, s0_scale)"""
    a0: np.ndarray
    v0: np.ndarray
    s0_scale: np.ndarray
    s0_dof: float


@tags_operation("minnesota.estimate_scales")
def estimate_scales(panel: TimeSeriesPanel, p: int) -> ScaleEstimates:
    """Residual sd of a univariate AR(p) with intercept for every variable"""
    T = panel.T
    if T <= p + 2:
        raise TooFewObservations(f"need T > p + 2 = {p + 2}, got T={T}")

    dof = T - p - (p + 1)
    sigma = np.empty(panel.m)
    for i in range(panel.m):
        series = panel.values[:, i]
        X = np.column_stack([np.ones(T - p)] + [series[p - lag: T - lag] for lag in range(1, p + 1)])
        y = series[p:]
        if np.linalg.matrix_rank(X) < p + 1:
            raise SingularDesign(f"AR({p}) regressors of {panel.names[i]!r} are collinear")
        beta, *_ = linalg.lstsq(X, y)
        rss = float(np.sum((y - X @ beta) ** 2))
        if rss <= 0.0:
            raise SingularDesign(f"AR({p}) fit of {panel.names[i]!r} leaves no residual variance")
        sigma[i] = np.sqrt(rss / dof)

    logger.debug("Estimated AR scales", extra={"p": p, "sigma_hat": sigma.tolist()})
    return ScaleEstimates(sigma)


@tags_operation("minnesota.build_dummies")
def build_dummies(hyper: MinnesotaHyper, scales: ScaleEstimates, m: int, p: int) -> DummyObservations:
    if scales.m != m:
        raise ShapeMismatch(f"{scales.m} scale estimates for m={m}")
    sigma = scales.sigma_hat
    phi = hyper.phi_vector(m)
    n = m * p + 1
    rows = m * p + m + 1

    y_dummy = np.zeros((rows, m))
    x_dummy = np.zeros((rows, n))

    y_dummy[:m] = np.diag(phi * sigma) / hyper.theta1
    x_dummy[:m * p, :m * p] = np.kron(np.diag(np.arange(1, p + 1, dtype=float)), np.diag(sigma)) / hyper.theta1
    y_dummy[m * p: m * p + m] = np.diag(sigma)
    x_dummy[-1, -1] = hyper.pi ** -0.5

    return DummyObservations(y_dummy=y_dummy, x_dummy=x_dummy, m=m, p=p)


@tags_operation("minnesota.implied_prior_moments")
def implied_prior_moments(dummies: DummyObservations, hyper: MinnesotaHyper) -> PriorMoments:
    X, Y = dummies.x_dummy, dummies.y_dummy
    gram = X.T @ X
    try:
        factor = linalg.cho_factor(gram, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularPrior(f"dummy Gram matrix is not invertible: {exc}") from exc
    if not np.all(np.isfinite(factor[0])):
        raise SingularPrior("dummy Gram matrix is not invertible")

    v0 = linalg.cho_solve(factor, np.eye(gram.shape[0]))
    v0 = 0.5 * (v0 + v0.T)
    a0 = linalg.cho_solve(factor, X.T @ Y)
    resid = Y - X @ a0
    s0_scale = resid.T @ resid
    return PriorMoments(
        a0=a0,
        v0=v0,
        s0_scale=0.5 * (s0_scale + s0_scale.T),
        s0_dof=hyper.prior_dof(dummies.m),
    )
