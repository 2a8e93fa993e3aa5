"""Evaluation report across models, horizons and target variables"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from sparsebvar.errors import (
    DegeneratePredictive,
    DivisionByZero,
    ShapeMismatch,
    TooFewModels,
    TooShort,
    tags_operation,
)
from sparsebvar.evaluation.calibration import calibration_tests, normalized_errors
from sparsebvar.evaluation.comparison import ag_test, dm_test
from sparsebvar.evaluation.mcs import DEFAULT_ALPHA, DEFAULT_REPS, McsResult, mcs
from sparsebvar.evaluation.metrics import LossKind, LossMatrix, log_predictive_likelihood, rmse, rmse_ratio
from sparsebvar.forecast.recursive import OriginForecast
from sparsebvar.utils import significance_stars

logger = logging.getLogger(__name__)

JOINT = "joint"
REPORT_COLUMNS = [
    "model", "horizon", "variable", "n_origins",
    "rmse", "rmse_ratio", "dm_stat", "dm_pvalue", "dm_stars",
    "lpl", "lpl_diff", "ag_stat", "ag_pvalue", "ag_stars",
    "mcs_point", "mcs_point_rank", "mcs_density", "mcs_density_rank",
    "pit_mean", "pit_mean_pvalue", "pit_variance", "pit_variance_pvalue", "pit_ar1", "pit_ar1_pvalue",
]
SKIPPED = (TooShort, TooFewModels, DivisionByZero, DegeneratePredictive)


@dataclass
class EvalReport:
    table: pd.DataFrame
    cumulative_lpl: pd.DataFrame
    normalized_errors: pd.DataFrame
    benchmark: str
    summary: Dict = field(default_factory=dict)

    def row(self, model: str, horizon: int, variable: str) -> pd.Series:
        match = self.table[(self.table.model == model) & (self.table.horizon == horizon)
                           & (self.table.variable == variable)]
        if match.empty:
            raise ShapeMismatch(f"no report row for {model}, h={horizon}, {variable}")
        return match.iloc[0]


def _by_model(forecasts: Sequence[OriginForecast]) -> "OrderedDict[str, Dict[str, OriginForecast]]":
    grouped: "OrderedDict[str, Dict[str, OriginForecast]]" = OrderedDict()
    for item in forecasts:
        grouped.setdefault(item.model, {})[item.origin] = item
    return grouped


def _common_origins(grouped, h: int) -> List[str]:
    """Origins forecast by every model whose h-step target is observed"""
    sets = [set(by_origin) for by_origin in grouped.values()]
    common = set.intersection(*sets)
    first = next(iter(grouped.values()))
    ordered = sorted(common, key=lambda o: first[o].origin_index)
    return [o for o in ordered if np.all(np.isfinite(first[o].realized[first[o].run.horizon_position(h)]))]


def _try(label: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SKIPPED as exc:
        logger.warning(f"{label} skipped: {exc}")
        return None


def _mcs_membership(result: Optional[McsResult], model: str):
    if result is None:
        return np.nan, np.nan
    return bool(result.contains(model)), result.rank(model)


@tags_operation("report.build_report")
def build_report(
    forecasts: Sequence[OriginForecast],
    benchmark: str,
    horizons: Optional[Sequence[int]] = None,
    alpha: float = DEFAULT_ALPHA,
    mcs_reps: int = DEFAULT_REPS,
    block_size: Optional[int] = None,
    seed: int = 0,
) -> EvalReport:
    """RMSE, log scores, DM/AG tests against `benchmark`, MCS membership and PIT
    calibration for every (model, horizon, target) plus the joint density"""
    grouped = _by_model(forecasts)
    if benchmark not in grouped:
        raise ShapeMismatch(f"benchmark {benchmark!r} not among models {list(grouped)}")
    models = list(grouped)
    sample = next(iter(grouped[benchmark].values()))
    targets = sample.targets
    horizons = tuple(horizons) if horizons else sample.run.horizons

    rows, cumulative, z_rows = [], [], []
    for h in horizons:
        origins = _common_origins(grouped, h)
        if not origins:
            logger.warning(f"No realized values at horizon {h}; skipped")
            continue
        k = sample.run.horizon_position(h)
        realized = {m: np.array([grouped[m][o].realized[k] for o in origins]) for m in models}

        errors = {m: np.array([grouped[m][o].errors(h) for o in origins]) for m in models}
        scopes = [(name, [j]) for j, name in enumerate(targets)] + [(JOINT, list(range(len(targets))))]
        for variable, scope in scopes:
            log_scores = {
                m: log_predictive_likelihood(
                    [grouped[m][o].run.components(h) for o in origins], realized[m], scope
                )
                for m in models
            }
            density_losses = LossMatrix(np.column_stack([-log_scores[m] for m in models]), models,
                                        origins, h, variable, LossKind.NEGATIVE_LOG_SCORE)
            mcs_density = _try(f"density MCS h={h} {variable}", mcs, density_losses, alpha,
                               block_size, mcs_reps, seed)
            mcs_point = None
            if variable != JOINT:
                j = scope[0]
                point_losses = LossMatrix(np.column_stack([errors[m][:, j] ** 2 for m in models]), models,
                                          origins, h, variable, LossKind.SQUARED_ERROR)
                mcs_point = _try(f"point MCS h={h} {variable}", mcs, point_losses, alpha,
                                 block_size, mcs_reps, seed)

            for m in models:
                row = dict.fromkeys(REPORT_COLUMNS, np.nan)
                row.update(model=m, horizon=h, variable=variable, n_origins=len(origins))
                lpl = log_scores[m]
                row["lpl"] = float(lpl.sum())
                row["lpl_diff"] = float(lpl.sum() - log_scores[benchmark].sum())
                ag = _try(f"AG {m} h={h} {variable}", ag_test, lpl - log_scores[benchmark], h)
                if ag is not None:
                    row["ag_stat"], row["ag_pvalue"] = ag
                    row["ag_stars"] = significance_stars(ag[1])
                row["mcs_density"], row["mcs_density_rank"] = _mcs_membership(mcs_density, m)

                if variable != JOINT:
                    e, e_bench = errors[m][:, scope[0]], errors[benchmark][:, scope[0]]
                    row["rmse"] = rmse(e)
                    ratio = _try(f"RMSE ratio {m}", rmse_ratio, e, e_bench)
                    row["rmse_ratio"] = np.nan if ratio is None else ratio
                    dm = _try(f"DM {m} h={h} {variable}", dm_test, e ** 2 - e_bench ** 2, h)
                    if dm is not None:
                        row["dm_stat"], row["dm_pvalue"] = dm
                        row["dm_stars"] = significance_stars(dm[1])
                    row["mcs_point"], row["mcs_point_rank"] = _mcs_membership(mcs_point, m)

                    position = grouped[m][origins[0]].target_positions()[scope[0]]
                    draws = [grouped[m][o].run.path_draws(h, position) for o in origins]
                    z = _try(f"PIT {m} h={h} {variable}", normalized_errors, draws, realized[m][:, scope[0]])
                    if z is not None:
                        tests = _try(f"calibration {m} h={h} {variable}", calibration_tests, z)
                        if tests is not None:
                            row.update({f"pit_{key}": value for key, value in tests.to_dict().items()})
                        z_rows.extend({"model": m, "horizon": h, "variable": variable, "origin": o,
                                       "z": float(v)} for o, v in zip(origins, z))

                rows.append(row)
                cumulative.extend(
                    {"model": m, "horizon": h, "variable": variable, "origin": o, "cumulative_lpl": float(c)}
                    for o, c in zip(origins, np.cumsum(lpl))
                )

    table = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    summary = {
        "benchmark": benchmark,
        "models": models,
        "horizons": list(horizons),
        "targets": list(targets),
        "alpha": alpha,
        "mcs_reps": mcs_reps,
        "rows": len(table),
    }
    logger.info(f"Evaluation report: {len(models)} model(s), {len(table)} row(s)")
    return EvalReport(
        table=table,
        cumulative_lpl=pd.DataFrame(cumulative, columns=["model", "horizon", "variable", "origin", "cumulative_lpl"]),
        normalized_errors=pd.DataFrame(z_rows, columns=["model", "horizon", "variable", "origin", "z"]),
        benchmark=benchmark,
        summary=summary,
    )
