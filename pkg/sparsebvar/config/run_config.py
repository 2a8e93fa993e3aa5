"""Validated run configuration read from a JSON document"""
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from sparsebvar.errors import ConfigError

SparsityLevel = Union[Literal["dense", "moderate", "sparse"], float]

DEFAULT_THETA_GRID = [
    0.01, 0.025, 0.050, 0.075, 0.10, 0.125, 0.15, 0.20, 0.25,
    0.30, 0.35, 0.40, 0.45, 0.50, 0.75, 1.0, 2.0, 5.0,
]


class Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SparsifyBlock(Block):
    enabled: bool = False
    coefficients: bool = True
    precision: bool = True
    lam: float = Field(1.0, ge=0)
    zeta: float = Field(2.0, ge=1)
    scheme: Literal["lag_wise", "plain"] = "lag_wise"
    varpi: Optional[float] = Field(None, ge=0)
    kappa_prec: float = Field(2.0, ge=1)
    mode: Literal["one_sweep", "iterate_to_tol"] = "one_sweep"
    threshold: Literal["soft", "exact"] = "soft"
    sparsify_intercept: bool = False
    sparsify_first_own_lag: bool = False


class ModelBlock(Block):
    name: str = "MIN"
    size: Literal["S", "M", "FA", "L"] = "S"
    p: int = Field(5, ge=1)
    theta_mode: Optional[Literal["grid", "fixed"]] = None
    theta1: float = Field(0.05, gt=0)
    theta_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_THETA_GRID), min_length=1)
    pi: float = Field(1e6, gt=0)
    n_factors: int = Field(3, ge=1)
    variables: Optional[List[str]] = None
    # overrides the top-level sparsify block for this model
    sparsify: Optional[SparsifyBlock] = None

    @field_validator("theta_grid")
    @classmethod
    def _positive_grid(cls, grid: List[float]) -> List[float]:
        if any(value <= 0 for value in grid):
            raise ValueError("theta_grid values must be positive")
        return grid


class SamplingBlock(Block):
    draws: int = Field(500, ge=1)
    sims_per_draw: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)


class StudyBlock(Block):
    m: List[int] = Field(default_factory=lambda: [3], min_length=1)
    T: List[int] = Field(default_factory=lambda: [240], min_length=1)
    sparsity: List[SparsityLevel] = Field(default_factory=lambda: ["sparse"], min_length=1)
    replications: int = Field(30, ge=1)
    p: int = Field(5, ge=1)
    xi: Optional[float] = Field(None, gt=0)
    burn_in: int = Field(100, ge=0)
    lag_decay: float = Field(2.0, ge=0)
    lambdas: List[float] = Field(default_factory=lambda: [0.01, 0.1, 0.5, 1.0])
    varpi: Optional[float] = Field(None, ge=0)
    savs_median: bool = True
    cda: bool = True
    cov_parameterization: Literal["sigma", "cholesky", "precision"] = "sigma"

    @field_validator("m", "T")
    @classmethod
    def _positive_sizes(cls, values: List[int]) -> List[int]:
        if any(v < 1 for v in values):
            raise ValueError("sizes must be >= 1")
        return values

    @field_validator("lambdas")
    @classmethod
    def _nonnegative_lambdas(cls, values: List[float]) -> List[float]:
        if any(v < 0 for v in values):
            raise ValueError("lambdas must be >= 0")
        return values


class ForecastBlock(Block):
    split_date: str = "1989Q4"
    horizons: List[int] = Field(default_factory=lambda: [1, 4, 8], min_length=1)
    targets: Optional[List[str]] = None

    @field_validator("horizons")
    @classmethod
    def _positive_horizons(cls, values: List[int]) -> List[int]:
        if any(h < 1 for h in values):
            raise ValueError("horizons must be >= 1")
        return values


class EvaluateBlock(Block):
    benchmark: Optional[str] = None
    alpha: float = Field(0.25, gt=0, lt=1)
    mcs_reps: int = Field(5000, ge=1)
    block_size: Optional[int] = Field(None, ge=1)
    forecasts_dir: Optional[str] = None


class SimulatedDataBlock(Block):
    m: int = Field(3, ge=1)
    T: int = Field(160, ge=2)
    p: int = Field(2, ge=1)
    sparsity: SparsityLevel = "sparse"
    xi: Optional[float] = Field(None, gt=0)
    burn_in: int = Field(100, ge=0)
    lag_decay: float = Field(2.0, ge=0)
    start: str = "1959Q1"


class DataBlock(Block):
    source: Literal["csv", "simulated"] = "csv"
    csv: Optional[str] = None
    manifest: Optional[str] = None
    price_variable: Optional[str] = None
    target_price: bool = False
    sample_start: Optional[str] = None
    sample_end: Optional[str] = None
    simulated: SimulatedDataBlock = Field(default_factory=SimulatedDataBlock)


class PathsBlock(Block):
    output: str = "./runs"


class RunConfig(Block):
    model: ModelBlock = Field(default_factory=ModelBlock)
    models: Optional[List[ModelBlock]] = None
    sparsify: SparsifyBlock = Field(default_factory=SparsifyBlock)
    sampling: SamplingBlock = Field(default_factory=SamplingBlock)
    study: StudyBlock = Field(default_factory=StudyBlock)
    forecast: ForecastBlock = Field(default_factory=ForecastBlock)
    evaluate: EvaluateBlock = Field(default_factory=EvaluateBlock)
    data: DataBlock = Field(default_factory=DataBlock)
    paths: PathsBlock = Field(default_factory=PathsBlock)
    workers: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _unique_model_names(self) -> "RunConfig":
        if self.models:
            names = [block.name for block in self.models]
            if len(set(names)) != len(names):
                raise ValueError(f"model names must be unique, got {names}")
        return self

    def model_blocks(self) -> List[ModelBlock]:
        return list(self.models) if self.models else [self.model]

    def sparsify_for(self, block: ModelBlock) -> SparsifyBlock:
        return block.sparsify if block.sparsify is not None else self.sparsify


def _apply_overrides(raw: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    if overrides.get("seed") is not None:
        raw.setdefault("sampling", {})["seed"] = overrides["seed"]
    if overrides.get("workers") is not None:
        raw["workers"] = overrides["workers"]
    if overrides.get("output") is not None:
        raw.setdefault("paths", {})["output"] = overrides["output"]
    return raw


def load_run_config(path: Optional[Union[str, Path]] = None,
                    overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Defaults, then the JSON file, then command-line overrides (seed, workers, output)"""
    raw: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                raw = json.load(handle)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}", "config.load_run_config") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}", "config.load_run_config") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path} must hold a JSON object", "config.load_run_config")
    raw = _apply_overrides(raw, overrides or {})
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(str(exc), "config.load_run_config") from exc


def dump_run_config(cfg: RunConfig) -> str:
    return cfg.model_dump_json(indent=2)
