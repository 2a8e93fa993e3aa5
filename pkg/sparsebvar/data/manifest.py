"""Variable manifest: transform codes, model-size flags and targets"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from sparsebvar.config.settings import settings
from sparsebvar.data.transforms import TRANSFORM_ORDER
from sparsebvar.errors import FlagInconsistency, MissingColumn, tags_operation

logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = ("mnemonic", "tcode", "small", "medium", "large", "block")
DEFAULT_TARGETS: Tuple[str, ...] = ("GDPC1", "CPIAUCSL", "FEDFUNDS")


class Block(Enum):
    SLOW = "slow"
    POLICY_RATE = "policy_rate"
    FAST = "fast"


class ModelSize(Enum):
    S = "S"
    M = "M"
    FA = "FA"
    L = "L"


@dataclass(frozen=True)
class VariableSpec:
    mnemonic: str
    tcode: int
    small: bool
    medium: bool
    large: bool
    block: Block
    description: str = ""

    def __post_init__(self):
        if self.tcode not in TRANSFORM_ORDER:
            raise FlagInconsistency(f"{self.mnemonic}: unsupported transform code {self.tcode}")
        object.__setattr__(self, "block", Block(self.block))


@dataclass(frozen=True)
class DatasetManifest:
    variables: Tuple[VariableSpec, ...]
    targets: Tuple[str, ...] = DEFAULT_TARGETS
    # S-set price variable; None keeps the SMALL flags of the manifest
    price_variable: Optional[str] = None
    sample_start: Optional[str] = None
    sample_end: Optional[str] = None
    extra: dict = field(default_factory=dict)

    @property
    def mnemonics(self) -> List[str]:
        return [v.mnemonic for v in self.variables]

    def spec(self, mnemonic: str) -> VariableSpec:
        for variable in self.variables:
            if variable.mnemonic == mnemonic:
                return variable
        raise MissingColumn(mnemonic, "manifest.spec")

    def with_targets(self, targets: Sequence[str]) -> "DatasetManifest":
        return replace(self, targets=tuple(targets))


def _flag(value) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in {"1", "x", "true", "yes"}
    return bool(value) and not pd.isna(value)


@tags_operation("manifest.load_manifest")
def load_manifest(path: Optional[str] = None, targets: Sequence[str] = DEFAULT_TARGETS,
                  price_variable: Optional[str] = None) -> DatasetManifest:
    path = path or settings.manifest_path()
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    for column in MANIFEST_COLUMNS:
        if column not in frame.columns:
            raise MissingColumn(column)

    variables = tuple(
        VariableSpec(
            mnemonic=row["mnemonic"].strip(),
            tcode=int(row["tcode"]),
            small=_flag(row["small"]),
            medium=_flag(row["medium"]),
            large=_flag(row["large"]),
            block=Block(row["block"].strip()),
            description=row.get("description", "").strip(),
        )
        for _, row in frame.iterrows()
    )
    logger.debug(f"Loaded manifest with {len(variables)} variables from {path}")
    return DatasetManifest(variables=variables, targets=tuple(targets), price_variable=price_variable)


def _check_nesting(manifest: DatasetManifest) -> None:
    for v in manifest.variables:
        if v.small and not v.medium:
            raise FlagInconsistency(f"{v.mnemonic} is SMALL but not MEDIUM")
        if v.medium and not v.large:
            raise FlagInconsistency(f"{v.mnemonic} is MEDIUM but not LARGE")


def small_set(manifest: DatasetManifest) -> List[str]:
    """SMALL-flagged variables, with the price variable swapped in when configured"""
    names = [v.mnemonic for v in manifest.variables if v.small]
    if manifest.price_variable is not None:
        manifest.spec(manifest.price_variable)
        prices = [name for name in names if name not in ("GDPC1", "FEDFUNDS")]
        names = [manifest.price_variable if name in prices else name for name in names]
    return names


@tags_operation("manifest.select_set")
def select_set(manifest: DatasetManifest, size: ModelSize) -> Tuple[List[str], List[str]]:
    """(model variables, factor-source variables); the second list is empty except for FA"""
    size = ModelSize(size)
    _check_nesting(manifest)
    large = [v.mnemonic for v in manifest.variables if v.large]
    for target in manifest.targets:
        if target not in large:
            raise FlagInconsistency(f"target {target} is not in the LARGE set")

    if size is ModelSize.S:
        variables = small_set(manifest)
    elif size is ModelSize.M:
        variables = [v.mnemonic for v in manifest.variables if v.medium]
    elif size is ModelSize.L:
        variables = large
    else:
        variables = list(manifest.targets)

    missing = [t for t in manifest.targets if t not in variables]
    if size is not ModelSize.FA and size is not ModelSize.S and missing:
        raise FlagInconsistency(f"targets {missing} missing from the {size.value} set")

    sources = [name for name in large if name not in manifest.targets] if size is ModelSize.FA else []
    return variables, sources


def with_target_price(manifest: DatasetManifest) -> DatasetManifest:
    """Swap the target price series into the S set when the SMALL flags name another one"""
    if manifest.price_variable is not None:
        return manifest
    small = [v.mnemonic for v in manifest.variables if v.small]
    outside = [t for t in manifest.targets if t not in small]
    if len(outside) != 1:
        return manifest
    logger.info(f"S-set price variable set to target {outside[0]}")
    return replace(manifest, price_variable=outside[0])
