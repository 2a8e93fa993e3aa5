"""VAR data model, lag design, coefficient indexing and stability checks.

Conventions: lag l and variable indices i, j are 1-based as in the model
notation y_t = A_1 y_{t-1} + ... + A_p y_{t-p} + C + e_t. Matrix positions
and flat indices returned to callers are 0-based numpy positions.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg

from sparsebvar.errors import (
    IndexOutOfRange,
    NotPositiveDefinite,
    NumericalFailure,
    ShapeMismatch,
    TooFewObservations,
    tags_operation,
)


def _frozen(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TimeSeriesPanel:
    """T x m observations with variable names and ordered period labels"""
    values: np.ndarray
    names: Tuple[str, ...]
    dates: Tuple[str, ...]

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if values.ndim != 2 or values.shape[0] < 1:
            raise ShapeMismatch("panel needs at least one row")
        if values.shape[1] != len(self.names):
            raise ShapeMismatch(f"{values.shape[1]} columns but {len(self.names)} names")
        if values.shape[0] != len(self.dates):
            raise ShapeMismatch(f"{values.shape[0]} rows but {len(self.dates)} dates")
        if not np.all(np.isfinite(values)):
            raise ShapeMismatch("panel contains missing or non-finite entries")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        object.__setattr__(self, "dates", tuple(str(d) for d in self.dates))

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "TimeSeriesPanel":
        return cls(frame.to_numpy(dtype=float), tuple(frame.columns), tuple(frame.index))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(np.array(self.values), index=list(self.dates), columns=list(self.names))

    def select(self, names: Sequence[str]) -> "TimeSeriesPanel":
        columns = [self.names.index(name) for name in names]
        return TimeSeriesPanel(self.values[:, columns], tuple(names), self.dates)

    def head(self, rows: int) -> "TimeSeriesPanel":
        """First `rows` observations (data available at an origin)"""
        return TimeSeriesPanel(self.values[:rows], self.names, self.dates[:rows])

    def index_of(self, date: str) -> int:
        try:
            return self.dates.index(str(date))
        except ValueError:
            raise IndexOutOfRange(f"date {date!r} not in panel") from None


@dataclass(frozen=True)
class LagDesign:
    """Full-data matrices Y ((T-p) x m) and X ((T-p) x n), lag-major columns, intercept last"""
    Y: np.ndarray
    X: np.ndarray
    m: int
    p: int

    @property
    def n(self) -> int:
        return self.m * self.p + 1

    @property
    def k(self) -> int:
        return self.m * self.n

    @property
    def T(self) -> int:
        return self.Y.shape[0]


def lag_row(history: np.ndarray, p: int) -> np.ndarray:
    """Regressor row (y'_t, y'_{t-1}, ..., y'_{t-p+1}, 1) from the last p rows of `history`"""
    recent = np.asarray(history, dtype=float)[-p:][::-1]
    return np.concatenate([recent.reshape(-1), [1.0]])


@tags_operation("var_core.build_lag_design")
def build_lag_design(panel: TimeSeriesPanel, p: int) -> LagDesign:
    if p < 1:
        raise TooFewObservations(f"lag order must be >= 1, got {p}")
    T, m = panel.values.shape
    if T <= p:
        raise TooFewObservations(f"need more than p={p} observations, got T={T}")

    data = panel.values
    rows = T - p
    X = np.empty((rows, m * p + 1))
    for lag in range(1, p + 1):
        X[:, (lag - 1) * m: lag * m] = data[p - lag: T - lag]
    X[:, -1] = 1.0
    return LagDesign(Y=_frozen(data[p:]), X=_frozen(X), m=m, p=p)


def coefficient_position(l: int, i: int, j: int, m: int, p: int) -> Tuple[int, int]:
    """(row, column) of lag-l coefficient on variable i in equation j"""
    if not (1 <= l <= p and 1 <= i <= m and 1 <= j <= m):
        raise IndexOutOfRange(f"(l={l}, i={i}, j={j}) outside lags 1..{p}, variables 1..{m}")
    return (l - 1) * m + (i - 1), j - 1


@tags_operation("var_core.vec_index")
def vec_index(l: int, i: int, j: int, m: int, p: int) -> int:
    """Flat index into a = vec(A) (column-major: equation blocks of length n)"""
    row, col = coefficient_position(l, i, j, m, p)
    return col * (m * p + 1) + row


@tags_operation("var_core.vec_unindex")
def vec_unindex(index: int, m: int, p: int) -> Tuple[int, int, int]:
    """Inverse of vec_index; intercept positions are not lag coefficients"""
    n = m * p + 1
    if not 0 <= index < m * n:
        raise IndexOutOfRange(f"flat index {index} outside 0..{m * n - 1}")
    col, row = divmod(index, n)
    if row == n - 1:
        raise IndexOutOfRange(f"flat index {index} is the intercept of equation {col + 1}")
    lag, var = divmod(row, m)
    return lag + 1, var + 1, col + 1


def intercept_index(j: int, m: int, p: int) -> int:
    """Flat index of the intercept of equation j (row n of A)"""
    if not 1 <= j <= m:
        raise IndexOutOfRange(f"equation {j} outside 1..{m}")
    n = m * p + 1
    return (j - 1) * n + n - 1


@dataclass(frozen=True)
class VarCoefficients:
    """Stacked coefficient matrix A = (A_1', ..., A_p', C')', shape n x m"""
    A: np.ndarray
    m: int
    p: int

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.shape != (self.m * self.p + 1, self.m):
            raise ShapeMismatch(f"expected {(self.m * self.p + 1, self.m)}, got {A.shape}")
        object.__setattr__(self, "A", _frozen(A))

    @property
    def n(self) -> int:
        return self.m * self.p + 1

    def get(self, l: int, i: int, j: int) -> float:
        return float(self.A[coefficient_position(l, i, j, self.m, self.p)])

    def lag_matrix(self, l: int) -> np.ndarray:
        """A_l with A_l[j, i] = effect of y_{i, t-l} on y_{j, t}"""
        if not 1 <= l <= self.p:
            raise IndexOutOfRange(f"lag {l} outside 1..{self.p}")
        return np.array(self.A[(l - 1) * self.m: l * self.m].T)

    @property
    def intercept(self) -> np.ndarray:
        return np.array(self.A[-1])

    def vectorize(self) -> np.ndarray:
        return np.array(self.A).reshape(-1, order="F")

    @classmethod
    def devectorize(cls, a: np.ndarray, m: int, p: int) -> "VarCoefficients":
        return cls(np.asarray(a, dtype=float).reshape((m * p + 1, m), order="F"), m, p)

    @classmethod
    def from_lags(cls, lags: Sequence[np.ndarray], intercept: Optional[np.ndarray] = None) -> "VarCoefficients":
        m = np.asarray(lags[0]).shape[0]
        c = np.zeros(m) if intercept is None else np.asarray(intercept, dtype=float)
        A = np.vstack([np.asarray(L, dtype=float).T for L in lags] + [c[None, :]])
        return cls(A, m, len(lags))

    def companion(self) -> np.ndarray:
        """mp x mp companion matrix of A_1..A_p (intercept excluded)"""
        m, p = self.m, self.p
        F = np.zeros((m * p, m * p))
        F[:m, :] = self.A[:-1].T
        if p > 1:
            F[m:, :-m] = np.eye(m * (p - 1))
        return F


@tags_operation("var_core.companion_spectral_radius")
def companion_spectral_radius(coeffs: VarCoefficients) -> float:
    try:
        eigenvalues = np.linalg.eigvals(coeffs.companion())
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigen-solver failed: {exc}") from exc
    return float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0


def is_stable(coeffs: VarCoefficients) -> bool:
    return companion_spectral_radius(coeffs) < 1.0


@dataclass(frozen=True)
class CovMatrix:
    """Symmetric positive-definite m x m covariance with cached lower Cholesky factor"""
    sigma: np.ndarray
    rtol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if sigma.shape[0] != sigma.shape[1]:
            raise ShapeMismatch(f"covariance must be square, got {sigma.shape}")
        scale = max(np.max(np.abs(sigma)), np.finfo(float).tiny)
        if np.max(np.abs(sigma - sigma.T)) > self.rtol * scale:
            raise NotPositiveDefinite("covariance is not symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        object.__setattr__(self, "sigma", _frozen(sigma))
        # validates positive definiteness eagerly
        _ = self.chol

    @cached_property
    def chol(self) -> np.ndarray:
        try:
            factor = linalg.cholesky(self.sigma, lower=True)
        except linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"Cholesky factorization failed: {exc}") from exc
        factor.setflags(write=False)
        return factor

    @property
    def m(self) -> int:
        return self.sigma.shape[0]

    @property
    def free_parameters(self) -> int:
        return self.m * (self.m + 1) // 2

    def precision(self) -> np.ndarray:
        return linalg.cho_solve((self.chol, True), np.eye(self.m))

    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    @classmethod
    def from_precision(cls, omega: np.ndarray) -> "CovMatrix":
        try:
            factor = linalg.cho_factor(np.asarray(omega, dtype=float), lower=True)
        except linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"precision matrix is not positive definite: {exc}") from exc
        sigma = linalg.cho_solve(factor, np.eye(len(omega)))
        return cls(0.5 * (sigma + sigma.T))
