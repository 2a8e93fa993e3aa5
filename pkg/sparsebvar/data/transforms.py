"""Stationarity transforms and standardization"""
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from sparsebvar.errors import NonPositiveForLog, ShapeMismatch, ZeroVariance, tags_operation
from sparsebvar.model.var_core import TimeSeriesPanel

# observations consumed by each transform code
TRANSFORM_ORDER: Dict[int, int] = {1: 0, 2: 1, 5: 1, 6: 2, 7: 2}


def _check_positive(values: pd.Series, code: int) -> None:
    observed = values.dropna()
    if (observed <= 0).any():
        first = observed[observed <= 0].index[0]
        raise NonPositiveForLog(f"code {code} needs positive values; {values.name!r} is {observed[first]} at {first}")


@tags_operation("transforms.apply_transform")
def apply_transform(series: pd.Series, code: int) -> pd.Series:
    """1 level, 2 first difference, 5 log difference, 6 second log difference,
    7 change of the growth rate. The result drops the first `order` observations."""
    if code not in TRANSFORM_ORDER:
        raise ValueError(f"unsupported transform code {code}")
    series = pd.Series(series, dtype=float)
    if code == 1:
        out = series.copy()
    elif code == 2:
        out = series.diff()
    elif code == 5:
        _check_positive(series, code)
        out = np.log(series).diff()
    elif code == 6:
        _check_positive(series, code)
        out = np.log(series).diff().diff()
    else:
        out = (series / series.shift(1) - 1.0).diff()
    return out.iloc[TRANSFORM_ORDER[code]:]


@dataclass(frozen=True)
class StandardizationStats:
    mean: np.ndarray
    sd: np.ndarray
    names: Tuple[str, ...]

    def to_dict(self) -> Dict[str, Dict[str, float]]:
        return {name: {"mean": float(mu), "sd": float(s)} for name, mu, s in zip(self.names, self.mean, self.sd)}


@tags_operation("transforms.standardize")
def standardize(panel: TimeSeriesPanel) -> Tuple[TimeSeriesPanel, StandardizationStats]:
    """Demean and divide by the sample standard deviation (divisor T - 1)"""
    if panel.T < 2:
        raise ZeroVariance("standardization needs at least two observations")
    mean = panel.values.mean(axis=0)
    sd = panel.values.std(axis=0, ddof=1)
    flat = [name for name, s in zip(panel.names, sd) if not s > 0]
    if flat:
        raise ZeroVariance(f"zero variance in {flat}")
    scaled = (panel.values - mean) / sd
    return (
        TimeSeriesPanel(scaled, panel.names, panel.dates),
        StandardizationStats(mean=mean, sd=sd, names=panel.names),
    )


def apply_standardization(values: np.ndarray, stats: StandardizationStats) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != len(stats.names):
        raise ShapeMismatch(f"{values.shape[-1]} columns for {len(stats.names)} standardized variables")
    return (values - stats.mean) / stats.sd


def destandardize(values: np.ndarray, stats: StandardizationStats) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != len(stats.names):
        raise ShapeMismatch(f"{values.shape[-1]} columns for {len(stats.names)} standardized variables")
    return values * stats.sd + stats.mean
