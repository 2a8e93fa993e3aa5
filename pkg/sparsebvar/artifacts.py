"""On-disk artifacts: numpy arrays, sorted-key JSON and CSV tables.

Nothing written here carries a wall-clock timestamp, so reruns with the same
configuration and seed produce byte-identical files.
"""
import json
import logging
import math
import shutil
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from sparsebvar import __version__
from sparsebvar.data.transforms import StandardizationStats
from sparsebvar.errors import ConfigError, ShapeMismatch
from sparsebvar.forecast.recursive import OriginForecast
from sparsebvar.forecast.simulate import ForecastRun
from sparsebvar.model.posterior import ConjugateFit, PosteriorMoments
from sparsebvar.utils import safe_name

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.10g"
FORECAST_COLUMNS = ["origin", "horizon", "variable", "point", "realized", "draw_file"]


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def read_json(path: PathLike) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8", lineterminator="\n")
    return path


def prepare_output_dir(path: PathLike, force: bool = False) -> Path:
    """Create the run directory; an existing non-empty one is replaced only with `force`"""
    path = Path(path)
    if path.exists() and any(path.iterdir()):
        if not force:
            raise ConfigError(f"output directory {path} is not empty (use --force to overwrite)",
                              "artifacts.prepare_output_dir")
        shutil.rmtree(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_run_manifest(directory: PathLike, command: str, config: Dict[str, Any],
                       seeds: Dict[str, Any], data_hashes: Dict[str, str]) -> Path:
    return write_json({
        "version": __version__,
        "command": command,
        "config": config,
        "seeds": {key: str(value) for key, value in seeds.items()},
        "data_hashes": data_hashes,
    }, Path(directory) / "manifest.json")


def save_fit(fit: ConjugateFit, directory: PathLike, names: Sequence[str],
             metadata: Optional[Dict[str, Any]] = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    moments = fit.moments
    np.save(directory / "a_bar.npy", moments.a_bar)
    np.save(directory / "v_bar.npy", moments.v_bar)
    np.save(directory / "s1_scale.npy", moments.s1_scale)
    write_json({
        "theta1": fit.theta1,
        "log_ml": fit.log_ml,
        "s1_dof": moments.s1_dof,
        "m": moments.m,
        "p": moments.p,
        "names": list(names),
        "sigma_hat": fit.scales.sigma_hat,
        **(metadata or {}),
    }, directory / "fit.json")
    if fit.grid:
        write_csv(pd.DataFrame(fit.grid, columns=["theta1", "log_ml"]), directory / "theta_grid.csv")
    return directory


def load_fit(directory: PathLike) -> "tuple[PosteriorMoments, Dict[str, Any]]":
    directory = Path(directory)
    metadata = read_json(directory / "fit.json")
    moments = PosteriorMoments(
        a_bar=np.load(directory / "a_bar.npy"),
        v_bar=np.load(directory / "v_bar.npy"),
        s1_scale=np.load(directory / "s1_scale.npy"),
        s1_dof=float(metadata["s1_dof"]),
    )
    return moments, metadata


def _forecast_rows(item: OriginForecast, draw_file: str) -> List[Dict[str, Any]]:
    run = item.run
    rows = []
    for k, h in enumerate(run.horizons):
        point = run.point_at(h)
        for j, name in enumerate(run.names):
            realized = np.nan
            if name in item.targets:
                realized = item.realized[k, item.targets.index(name)]
            rows.append({"origin": item.origin, "horizon": h, "variable": name,
                         "point": float(point[j]), "realized": realized, "draw_file": draw_file})
    return rows


def save_forecast_run(item: OriginForecast, directory: PathLike) -> pd.DataFrame:
    """Draw-level arrays for one origin under `directory`; returns its forecast table rows"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = safe_name(item.origin)
    run = item.run
    np.save(directory / f"{stem}_paths.npy", run.paths)
    np.save(directory / f"{stem}_means.npy", run.cond_means)
    np.save(directory / f"{stem}_covs.npy", run.cond_covs)
    write_json({
        "model": item.model,
        "origin": item.origin,
        "origin_index": item.origin_index,
        "horizons": list(run.horizons),
        "names": list(run.names),
        "density_indices": list(run.density_indices),
        "draws_per_posterior": run.draws_per_posterior,
        "targets": list(item.targets),
        "realized": item.realized,
        "theta1": item.theta1,
        "log_ml": item.log_ml,
        "stats": {"mean": item.stats.mean, "sd": item.stats.sd, "names": list(item.stats.names)},
        "metadata": item.metadata,
    }, directory / f"{stem}.json")
    return pd.DataFrame(_forecast_rows(item, f"{stem}_paths.npy"), columns=FORECAST_COLUMNS)


def _load_origin(directory: Path, stem: str) -> OriginForecast:
    meta = read_json(directory / f"{stem}.json")
    run = ForecastRun(
        origin=meta["origin"],
        horizons=tuple(meta["horizons"]),
        names=tuple(meta["names"]),
        paths=np.load(directory / f"{stem}_paths.npy"),
        density_indices=tuple(meta["density_indices"]),
        cond_means=np.load(directory / f"{stem}_means.npy"),
        cond_covs=np.load(directory / f"{stem}_covs.npy"),
        draws_per_posterior=meta["draws_per_posterior"],
        metadata=dict(meta["metadata"], model=meta["model"]),
    )
    realized = np.array([[np.nan if v is None else v for v in row] for row in meta["realized"]], dtype=float)
    stats = meta["stats"]
    return OriginForecast(
        model=meta["model"],
        origin=meta["origin"],
        origin_index=int(meta["origin_index"]),
        run=run,
        realized=realized.reshape(len(run.horizons), len(meta["targets"])),
        targets=tuple(meta["targets"]),
        theta1=float(meta["theta1"]),
        log_ml=float(meta["log_ml"]),
        stats=StandardizationStats(np.array(stats["mean"]), np.array(stats["sd"]), tuple(stats["names"])),
        metadata=meta["metadata"],
    )


def load_forecast_runs(directory: PathLike) -> List[OriginForecast]:
    """Every saved origin of every model directory below `directory`"""
    directory = Path(directory)
    items = []
    for meta_path in sorted(directory.glob("*/*.json")):
        if meta_path.name in {"fit.json", "manifest.json", "summary.json"}:
            continue
        items.append(_load_origin(meta_path.parent, meta_path.stem))
    if not items:
        raise ShapeMismatch(f"no saved forecasts under {directory}", "artifacts.load_forecast_runs")
    items.sort(key=lambda item: (item.model, item.origin_index))
    logger.info(f"Loaded {len(items)} saved forecast origin(s) from {directory}")
    return items
