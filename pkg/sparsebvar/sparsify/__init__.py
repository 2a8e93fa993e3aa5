from .precision import (
    PdRepair,
    PrecisionConfig,
    PrecisionMode,
    SparsePrecision,
    ThresholdRule,
    precision_objective,
    sparsify_precision,
    sparsify_precision_chain,
)
from .savs import (
    ColumnNorms,
    SavsConfig,
    SavsScheme,
    SparsifiedDraw,
    column_norms,
    coordinate_descent,
    penalty_lambda,
    savs_draw,
    savs_point,
    sparsify_chain,
)

__all__ = [
    'ColumnNorms',
    'PdRepair',
    'PrecisionConfig',
    'PrecisionMode',
    'SavsConfig',
    'SavsScheme',
    'SparsePrecision',
    'SparsifiedDraw',
    'ThresholdRule',
    'column_norms',
    'coordinate_descent',
    'penalty_lambda',
    'precision_objective',
    'savs_draw',
    'savs_point',
    'sparsify_chain',
    'sparsify_precision',
    'sparsify_precision_chain'
]
