"""Principal-component factors for the factor-augmented VAR"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from sklearn.decomposition import PCA

from sparsebvar.data.transforms import StandardizationStats, standardize
from sparsebvar.errors import RankDeficient, tags_operation
from sparsebvar.model.var_core import TimeSeriesPanel

logger = logging.getLogger(__name__)

# eigenvalues below this share of the largest count as zero
EIGEN_TOL = 1e-10


@dataclass(frozen=True)
class FactorSpec:
    n_factors: int
    loadings: np.ndarray  # n_factors x k, rows are unit-norm eigenvectors
    explained_variance_ratio: np.ndarray
    sources: Tuple[str, ...]
    stats: StandardizationStats

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(f"F{i + 1}" for i in range(self.n_factors))

    def project(self, standardized: np.ndarray) -> np.ndarray:
        return np.asarray(standardized, dtype=float) @ self.loadings.T


def _sign_normalize(components: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude element is positive"""
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(components.shape[0]), pivots])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


@tags_operation("factors.pca_factors")
def pca_factors(panel: TimeSeriesPanel, n_factors: int = 3) -> Tuple[FactorSpec, TimeSeriesPanel]:
    """Top principal components of the standardized panel, ordered by eigenvalue"""
    if n_factors < 1:
        raise ValueError(f"n_factors must be >= 1, got {n_factors}")
    if panel.m < n_factors or panel.T < 2:
        raise RankDeficient(f"{n_factors} factors from a {panel.T} x {panel.m} panel")

    scaled, stats = standardize(panel)
    pca = PCA(n_components=min(panel.T, panel.m), svd_solver="full")
    pca.fit(scaled.values)
    eigenvalues = pca.explained_variance_
    positive = int(np.sum(eigenvalues > EIGEN_TOL * max(eigenvalues[0], 1.0)))
    if positive < n_factors:
        raise RankDeficient(f"only {positive} positive eigenvalue(s) for {n_factors} factors")

    loadings = _sign_normalize(pca.components_[:n_factors])
    spec = FactorSpec(
        n_factors=n_factors,
        loadings=loadings,
        explained_variance_ratio=pca.explained_variance_ratio_[:n_factors].copy(),
        sources=panel.names,
        stats=stats,
    )
    factors = TimeSeriesPanel(spec.project(scaled.values), spec.names, panel.dates)
    logger.debug(f"Extracted {n_factors} factors from {panel.m} series, "
                 f"explained share {float(spec.explained_variance_ratio.sum()):.3f}")
    return spec, factors
