from .calibration import CalibrationTests, calibration_tests, normalized_errors, pit_value
from .comparison import ag_test, dm_test, hac_mean_test
from .mcs import McsResult, default_block_size, mcs
from .metrics import (
    LossKind,
    LossMatrix,
    log_predictive_likelihood,
    mixture_log_score,
    rmse,
    rmse_ratio,
    t_log_score,
)
from .report import JOINT, EvalReport, build_report

__all__ = [
    'JOINT',
    'CalibrationTests',
    'EvalReport',
    'LossKind',
    'LossMatrix',
    'McsResult',
    'ag_test',
    'build_report',
    'calibration_tests',
    'default_block_size',
    'dm_test',
    'hac_mean_test',
    'log_predictive_likelihood',
    'mcs',
    'mixture_log_score',
    'normalized_errors',
    'pit_value',
    't_log_score',
    'rmse',
    'rmse_ratio'
]
