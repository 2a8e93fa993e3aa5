from .dgp import (
    CovParameterization,
    DgpConfig,
    DgpTruth,
    Sparsity,
    cov_mae,
    draw_dgp,
    mae,
    simulate_series,
)
from .study import (
    BENCHMARK_NAME,
    EstimatorKind,
    EstimatorSpec,
    StudyOptions,
    StudyResult,
    default_estimators,
    run_study,
)

__all__ = [
    'BENCHMARK_NAME',
    'CovParameterization',
    'DgpConfig',
    'DgpTruth',
    'EstimatorKind',
    'EstimatorSpec',
    'Sparsity',
    'StudyOptions',
    'StudyResult',
    'cov_mae',
    'default_estimators',
    'draw_dgp',
    'mae',
    'run_study',
    'simulate_series'
]
