"""Command implementations behind the CLI: study, fit, forecast and evaluate"""
import asyncio
import itertools
import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from sparsebvar.artifacts import (
    load_forecast_runs,
    prepare_output_dir,
    save_fit,
    save_forecast_run,
    write_csv,
    write_json,
    write_run_manifest,
)
from sparsebvar.config.run_config import ModelBlock, RunConfig, SparsifyBlock
from sparsebvar.config.settings import settings
from sparsebvar.data.loader import load_csv, prepare_panel
from sparsebvar.data.manifest import (
    DEFAULT_TARGETS,
    DatasetManifest,
    ModelSize,
    load_manifest,
    select_set,
    with_target_price,
)
from sparsebvar.data.transforms import standardize
from sparsebvar.database.service import RunService
from sparsebvar.evaluation.report import build_report
from sparsebvar.forecast.recursive import (
    ModelSpec,
    OriginForecast,
    ThetaMode,
    default_theta_mode,
    iter_recursive,
    model_panel,
)
from sparsebvar.model.minnesota import MinnesotaHyper
from sparsebvar.model.posterior import fit_conjugate, sample_posterior
from sparsebvar.model.var_core import TimeSeriesPanel
from sparsebvar.monitor.log import RunLogger
from sparsebvar.monitor.resource import ResourceMonitor, default_workers
from sparsebvar.simulation.dgp import CovParameterization, DgpConfig, draw_dgp, simulate_series
from sparsebvar.simulation.study import EstimatorKind, StudyOptions, default_estimators, run_study
from sparsebvar.sparsify.precision import PrecisionConfig, resolve_varpi, sparsify_precision_chain
from sparsebvar.sparsify.savs import SavsConfig, column_norms, sparsify_chain
from sparsebvar.utils import derive_seed, generate_id, hash_array, hash_file, safe_name

logger = logging.getLogger(__name__)

# seed stream keys
DATA_STREAM = 7
FIT_STREAM = 11
FORECAST_STREAM = 13
MCS_STREAM = 17


@dataclass
class DataContext:
    panel: TimeSeriesPanel
    manifest: Optional[DatasetManifest]
    targets: Tuple[str, ...]
    data_hash: str


class CommandRun:
    """Run id, run log, registry entry and resource snapshots around one command"""

    def __init__(self, command: str, cfg: RunConfig, output: Path):
        self.command = command
        self.cfg = cfg
        self.output = output
        self.run_id = generate_id()
        self.run_logger = RunLogger(self.run_id)
        self.registry = RunService()
        self.monitor = ResourceMonitor()

    def event(self, message: str, event_type: str = "info", metadata: Optional[Dict[str, Any]] = None):
        asyncio.run(self.run_logger.log_event(message, event_type, metadata))

    def __enter__(self) -> "CommandRun":
        self.registry.create_run(self.run_id, self.command, self.cfg.model_dump(mode="json"),
                                 self.cfg.sampling.seed, str(self.output))
        self.event(f"{self.command} started", metadata={"resources": self.monitor.get_system_resources()})
        return self

    def complete(self, summary: Dict[str, Any], data_hash: Optional[str] = None):
        self.registry.complete_run(self.run_id, summary, data_hash)
        self.event(f"{self.command} completed", metadata={
            "summary": summary, "resources": self.monitor.get_system_resources()
        })

    def __exit__(self, exc_type, exc, tb):
        if exc is not None:
            self.registry.fail_run(self.run_id, str(exc))
            self.event(f"{self.command} failed", "error", {"error": str(exc)})
        return False


def _study_configs(cfg: RunConfig) -> List[DgpConfig]:
    block = cfg.study
    return [
        DgpConfig(m=m, T=T, p=block.p, xi=block.xi, sparsity=sparsity, burn_in=block.burn_in,
                  lag_decay=block.lag_decay)
        for m, T, sparsity in itertools.product(block.m, block.T, block.sparsity)
    ]


def cmd_study(cfg: RunConfig, force: bool = False) -> Dict[str, Any]:
    output = prepare_output_dir(cfg.paths.output, force)
    block = cfg.study
    estimators = [
        replace(spec, varpi=block.varpi) if spec.kind is not EstimatorKind.BENCHMARK else spec
        for spec in default_estimators(block.lambdas)
        if (spec.kind is not EstimatorKind.SAVS_MEDIAN or block.savs_median)
        and (spec.kind is not EstimatorKind.CDA or block.cda)
    ]
    options = StudyOptions(
        draws=cfg.sampling.draws,
        seed=cfg.sampling.seed,
        zeta=cfg.sparsify.zeta,
        scheme=cfg.sparsify.scheme,
        kappa_prec=cfg.sparsify.kappa_prec,
        cov_parameterization=CovParameterization(block.cov_parameterization),
        workers=default_workers(cfg.workers),
    )
    with CommandRun("study", cfg, output) as run:
        result = run_study(_study_configs(cfg), block.replications, estimators, options, run.run_logger)
        write_csv(result.table, output / "study.csv")
        write_csv(result.replications, output / "replications.csv")
        write_csv(result.heatmaps, output / "heatmaps.csv")
        summary = {"cells": len(result.table), "replications": block.replications,
                   "estimators": [spec.name for spec in estimators]}
        write_json(summary, output / "summary.json")
        reps = result.replications.drop_duplicates(["m", "T", "sparsity", "replication"])
        data_hashes = {f"{r.m}/{r.T}/{r.sparsity}/{r.replication}": r.data_hash for r in reps.itertuples()}
        write_run_manifest(output, "study", cfg.model_dump(mode="json"),
                           {"seed": cfg.sampling.seed}, data_hashes)
        run.complete(summary)
    return summary


def load_data(cfg: RunConfig, variables: Optional[List[str]] = None) -> DataContext:
    """Panel for fit/forecast/evaluate: simulated from a DGP or read from CSV"""
    data = cfg.data
    if data.source == "simulated":
        sim = data.simulated
        dgp = DgpConfig(m=sim.m, T=sim.T, p=sim.p, xi=sim.xi, sparsity=sim.sparsity, burn_in=sim.burn_in,
                        lag_decay=sim.lag_decay, seed=derive_seed(cfg.sampling.seed, DATA_STREAM))
        panel = simulate_series(draw_dgp(dgp), sim.T, sim.burn_in, seed=dgp.seed, start=sim.start)
        targets = tuple(cfg.forecast.targets or panel.names[:min(3, panel.m)])
        return DataContext(panel, None, targets, hash_array(panel.values))

    targets = tuple(cfg.forecast.targets or DEFAULT_TARGETS)
    manifest = load_manifest(data.manifest, targets=targets, price_variable=data.price_variable)
    manifest = replace(manifest, sample_start=data.sample_start, sample_end=data.sample_end)
    if data.target_price:
        manifest = with_target_price(manifest)
    path = data.csv or os.path.join(settings.DATA_DIR, "fredqd.csv")
    raw = load_csv(path, manifest, variables)
    panel = prepare_panel(raw, manifest, variables)
    return DataContext(panel, manifest, targets, hash_file(path))


def _variables_for(block: ModelBlock, context_names: Tuple[str, ...], manifest: Optional[DatasetManifest],
                   targets: Tuple[str, ...]) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    size = ModelSize(block.size)
    if block.variables:
        variables = tuple(block.variables)
        sources = tuple(n for n in context_names if n not in variables) if size is ModelSize.FA else ()
        return variables, sources
    if manifest is not None:
        variables, sources = select_set(manifest, size)
        return tuple(variables), tuple(sources)
    if size is ModelSize.FA:
        return targets, tuple(n for n in context_names if n not in targets)
    return tuple(context_names), ()


def _sparsifiers(block: SparsifyBlock) -> Tuple[Optional[SavsConfig], Optional[PrecisionConfig]]:
    if not block.enabled:
        return None, None
    savs = None
    if block.coefficients:
        savs = SavsConfig(lam=block.lam, zeta=block.zeta, scheme=block.scheme,
                          sparsify_intercept=block.sparsify_intercept,
                          sparsify_first_own_lag=block.sparsify_first_own_lag)
    precision = None
    if block.precision:
        precision = PrecisionConfig(varpi=resolve_varpi(block.varpi, block.lam), kappa_prec=block.kappa_prec,
                                    mode=block.mode, threshold=block.threshold)
    return savs, precision


def model_specs(cfg: RunConfig, context: DataContext) -> List[ModelSpec]:
    specs = []
    for block in cfg.model_blocks():
        variables, sources = _variables_for(block, context.panel.names, context.manifest, context.targets)
        savs, precision = _sparsifiers(cfg.sparsify_for(block))
        specs.append(ModelSpec(
            name=block.name,
            variables=variables,
            size=ModelSize(block.size),
            factor_sources=sources,
            n_factors=block.n_factors,
            p=block.p,
            theta_mode=ThetaMode(block.theta_mode) if block.theta_mode else default_theta_mode(block.size),
            theta1=block.theta1,
            theta_grid=tuple(block.theta_grid),
            pi=block.pi,
            savs=savs,
            precision=precision,
            draws=cfg.sampling.draws,
            sims_per_draw=cfg.sampling.sims_per_draw,
            targets=context.targets,
        ))
    return specs


def _needed_variables(cfg: RunConfig) -> Optional[List[str]]:
    """Variables the configured models use, or None when a model takes a whole manifest set"""
    if cfg.data.source == "simulated":
        return None
    names: List[str] = []
    targets = list(cfg.forecast.targets or DEFAULT_TARGETS)
    for block in cfg.model_blocks():
        if not block.variables:
            return None
        names.extend(block.variables)
    return list(dict.fromkeys(targets + names))


def cmd_fit(cfg: RunConfig, force: bool = False) -> Dict[str, Any]:
    output = prepare_output_dir(cfg.paths.output, force)
    with CommandRun("fit", cfg, output) as run:
        context = load_data(cfg, _needed_variables(cfg))
        summary: Dict[str, Any] = {"models": {}}
        for index, spec in enumerate(model_specs(cfg, context)):
            scaled, stats = standardize(model_panel(context.panel, spec))
            grid = spec.theta_grid if spec.theta_mode is ThetaMode.GRID else None
            fit = fit_conjugate(scaled, spec.p, MinnesotaHyper(theta1=spec.theta1, pi=spec.pi), grid=grid)
            directory = output / "fits" / safe_name(spec.name)
            metadata = {"model": spec.name, "theta_mode": spec.theta_mode.value, "data_hash": context.data_hash,
                        "T": scaled.T, "stats": stats.to_dict()}

            if spec.sparse:
                draws = sample_posterior(fit.moments, spec.draws, derive_seed(cfg.sampling.seed, FIT_STREAM, index),
                                         workers=default_workers(cfg.workers))
                if spec.savs is not None:
                    _, freq = sparsify_chain(draws, column_norms(fit.design), spec.savs)
                    metadata["coefficient_inclusion"] = float(freq.mean())
                    directory.mkdir(parents=True, exist_ok=True)
                    np.save(directory / "coefficient_inclusion.npy", freq)
                if spec.precision is not None:
                    _, edges = sparsify_precision_chain(draws, spec.precision)
                    directory.mkdir(parents=True, exist_ok=True)
                    np.save(directory / "edge_inclusion.npy", edges)
                    metadata["edge_inclusion"] = float(edges.mean())

            save_fit(fit, directory, scaled.names, metadata)
            summary["models"][spec.name] = {"theta1": fit.theta1, "log_ml": fit.log_ml, "m": scaled.m}
            logger.info(f"Fitted {spec.name}: theta1={fit.theta1:g}, log ML={fit.log_ml:.3f}")

        write_json(summary, output / "summary.json")
        write_run_manifest(output, "fit", cfg.model_dump(mode="json"),
                           {"seed": cfg.sampling.seed}, {"data": context.data_hash})
        run.complete(summary, context.data_hash)
    return summary


def _run_forecasts(cfg: RunConfig, output: Path, run: CommandRun) -> Tuple[List[OriginForecast], DataContext]:
    context = load_data(cfg, _needed_variables(cfg))
    specs = model_specs(cfg, context)
    tables: Dict[str, list] = {spec.name: [] for spec in specs}
    forecasts = []
    stream = iter_recursive(
        context.panel, specs, cfg.forecast.split_date, cfg.forecast.horizons,
        seed=derive_seed(cfg.sampling.seed, FORECAST_STREAM),
        workers=default_workers(cfg.workers), run_logger=run.run_logger,
    )
    for item in stream:
        tables[item.model].append(save_forecast_run(item, output / "forecasts" / safe_name(item.model)))
        forecasts.append(item)
    for name, frames in tables.items():
        if frames:
            write_csv(pd.concat(frames, ignore_index=True), output / "forecasts" / safe_name(name) / "forecasts.csv")
    return forecasts, context


def cmd_forecast(cfg: RunConfig, force: bool = False) -> Dict[str, Any]:
    output = prepare_output_dir(cfg.paths.output, force)
    with CommandRun("forecast", cfg, output) as run:
        forecasts, context = _run_forecasts(cfg, output, run)
        summary = {"origins": len({f.origin for f in forecasts}), "models": [b.name for b in cfg.model_blocks()]}
        write_json(summary, output / "summary.json")
        write_run_manifest(output, "forecast", cfg.model_dump(mode="json"),
                           {"seed": cfg.sampling.seed}, {"data": context.data_hash})
        run.complete(summary, context.data_hash)
    return summary


def cmd_evaluate(cfg: RunConfig, force: bool = False) -> Dict[str, Any]:
    output = prepare_output_dir(cfg.paths.output, force)
    with CommandRun("evaluate", cfg, output) as run:
        if cfg.evaluate.forecasts_dir:
            forecasts = load_forecast_runs(cfg.evaluate.forecasts_dir)
            data_hash = ""
        else:
            forecasts, context = _run_forecasts(cfg, output, run)
            data_hash = context.data_hash
        benchmark = cfg.evaluate.benchmark or cfg.model_blocks()[0].name
        report = build_report(
            forecasts, benchmark, cfg.forecast.horizons, alpha=cfg.evaluate.alpha,
            mcs_reps=cfg.evaluate.mcs_reps, block_size=cfg.evaluate.block_size,
            seed=derive_seed(cfg.sampling.seed, MCS_STREAM),
        )
        write_csv(report.table, output / "report.csv")
        write_csv(report.cumulative_lpl, output / "cumulative_lpl.csv")
        write_csv(report.normalized_errors, output / "normalized_errors.csv")
        write_json(report.summary, output / "summary.json")
        write_run_manifest(output, "evaluate", cfg.model_dump(mode="json"),
                           {"seed": cfg.sampling.seed}, {"data": data_hash})
        run.complete(report.summary, data_hash or None)
    return report.summary


COMMANDS = {
    "study": cmd_study,
    "fit": cmd_fit,
    "forecast": cmd_forecast,
    "evaluate": cmd_evaluate,
}
