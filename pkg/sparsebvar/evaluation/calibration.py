"""Probability integral transforms, normalized forecast errors and calibration tests"""
import logging
from dataclasses import asdict, dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
import statsmodels.api as sm
from scipy.stats import norm

from sparsebvar.errors import DegeneratePredictive, ShapeMismatch, TooShort, tags_operation
from sparsebvar.evaluation.comparison import hac_mean_test

logger = logging.getLogger(__name__)

MEAN_TEST_LAGS = 5
VARIANCE_TEST_LAGS = 3


@dataclass(frozen=True)
class CalibrationTests:
    mean: float
    mean_pvalue: float
    variance: float
    variance_pvalue: float
    ar1: float
    ar1_pvalue: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def pit_value(draws: np.ndarray, realized: float) -> float:
    """Empirical predictive CDF at the realization, clamped to [1/(R+1), R/(R+1)]"""
    draws = np.asarray(draws, dtype=float).reshape(-1)
    if draws.size == 0:
        raise ShapeMismatch("no predictive draws")
    if np.ptp(draws) == 0.0:
        raise DegeneratePredictive(f"all {draws.size} predictive draws are identical")
    R = draws.size
    pit = float(np.mean(draws <= realized))
    return float(np.clip(pit, 1.0 / (R + 1), R / (R + 1)))


@tags_operation("calibration.normalized_errors")
def normalized_errors(draws: Sequence[np.ndarray], realized: Sequence[float]) -> np.ndarray:
    """Standard-normal quantiles of the per-origin PIT values"""
    realized = np.asarray(realized, dtype=float).reshape(-1)
    if len(draws) != realized.size:
        raise ShapeMismatch(f"{len(draws)} predictive samples for {realized.size} realizations")
    pits = np.array([pit_value(d, y) for d, y in zip(draws, realized)])
    return norm.ppf(pits)


def _variance_test(z: np.ndarray) -> Tuple[float, float]:
    """Regression of z^2 on a constant, H0: coefficient = 1"""
    estimate, statistic, p_value = hac_mean_test(z ** 2, VARIANCE_TEST_LAGS, null=1.0)
    return estimate, p_value


def _ar1_test(z: np.ndarray) -> Tuple[float, float]:
    regressors = sm.add_constant(z[:-1], has_constant="add")
    result = sm.OLS(z[1:], regressors).fit(cov_type="HC0")
    return float(result.params[1]), float(result.pvalues[1])


@tags_operation("calibration.calibration_tests")
def calibration_tests(z: Sequence[float]) -> CalibrationTests:
    """Zero mean (Newey-West, 5 lags), unit variance (z^2 on a constant, Newey-West,
    3 lags) and no first-order autocorrelation (heteroskedasticity-robust)"""
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size < 4:
        raise TooShort(f"need at least 4 normalized errors, got {z.size}")
    mean, _, mean_p = hac_mean_test(z, MEAN_TEST_LAGS)
    variance, variance_p = _variance_test(z)
    ar1, ar1_p = _ar1_test(z)
    return CalibrationTests(
        mean=mean, mean_pvalue=mean_p,
        variance=variance, variance_pvalue=variance_p,
        ar1=ar1, ar1_pvalue=ar1_p,
    )
