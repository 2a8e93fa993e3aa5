"""Pairwise predictive-accuracy tests on loss and log-score differentials"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import statsmodels.api as sm
from scipy.stats import norm

from sparsebvar.errors import ShapeMismatch, TooShort, tags_operation

logger = logging.getLogger(__name__)

MIN_LENGTH = 10


def hac_mean_test(series: Sequence[float], lags: int, null: float = 0.0) -> Tuple[float, float, float]:
    """(mean, t-statistic, two-sided normal p-value) for H0: E[series] = null,
    with a Newey-West (Bartlett) long-run variance truncated at `lags`"""
    series = np.asarray(series, dtype=float).reshape(-1)
    if not np.all(np.isfinite(series)):
        raise ShapeMismatch("differential contains non-finite values")
    centered = series - null
    if not np.any(centered - centered[0]):
        # constant series: no sampling variation to test against
        if centered[0] == 0.0:
            return float(series.mean()), 0.0, 1.0
        return float(series.mean()), float(np.sign(centered[0]) * np.inf), 0.0

    result = sm.OLS(centered, np.ones(len(centered))).fit(
        cov_type="HAC", cov_kwds={"maxlags": int(lags), "use_correction": False}
    )
    statistic = float(result.params[0] / result.bse[0])
    return float(series.mean()), statistic, float(2.0 * norm.sf(abs(statistic)))


def _differential_test(differential: Sequence[float], h: int, min_lags: Optional[int]) -> Tuple[float, float]:
    differential = np.asarray(differential, dtype=float).reshape(-1)
    if h < 1:
        raise ValueError(f"horizon must be >= 1, got {h}")
    if differential.size < MIN_LENGTH:
        raise TooShort(f"need at least {MIN_LENGTH} origins, got {differential.size}")
    lags = max(h - 1, 0) if min_lags is None else max(h - 1, int(min_lags))
    _, statistic, p_value = hac_mean_test(differential, lags)
    return statistic, p_value


@tags_operation("comparison.dm_test")
def dm_test(loss_diff: Sequence[float], h: int = 1, min_lags: Optional[int] = None) -> Tuple[float, float]:
    """Diebold-Mariano test on a loss differential (model minus benchmark)"""
    return _differential_test(loss_diff, h, min_lags)


@tags_operation("comparison.ag_test")
def ag_test(lpl_diff: Sequence[float], h: int = 1, min_lags: Optional[int] = None) -> Tuple[float, float]:
    """Amisano-Giacomini test of equal average log scores on a log-score differential"""
    return _differential_test(lpl_diff, h, min_lags)
