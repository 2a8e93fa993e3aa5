from .loader import load_csv, parse_period, prepare_panel
from .manifest import (
    DEFAULT_TARGETS,
    DatasetManifest,
    ModelSize,
    VariableSpec,
    load_manifest,
    select_set,
)
from .transforms import (
    TRANSFORM_ORDER,
    StandardizationStats,
    apply_standardization,
    apply_transform,
    destandardize,
    standardize,
)

__all__ = [
    'DEFAULT_TARGETS',
    'TRANSFORM_ORDER',
    'DatasetManifest',
    'ModelSize',
    'StandardizationStats',
    'VariableSpec',
    'apply_standardization',
    'apply_transform',
    'destandardize',
    'load_csv',
    'load_manifest',
    'parse_period',
    'prepare_panel',
    'select_set',
    'standardize'
]
