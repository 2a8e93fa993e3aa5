from .factors import FactorSpec, pca_factors
from .recursive import (
    LARGE_THETA1_CHOICES,
    ModelSpec,
    OriginForecast,
    ThetaMode,
    default_theta_mode,
    forecast_origin,
    iter_recursive,
    recursive_exercise,
)
from .simulate import (
    DEFAULT_HORIZONS,
    ForecastDraw,
    ForecastRun,
    compose_draws,
    conditional_moments,
    simulate_forecast,
)

__all__ = [
    'DEFAULT_HORIZONS',
    'LARGE_THETA1_CHOICES',
    'FactorSpec',
    'ForecastDraw',
    'ForecastRun',
    'ModelSpec',
    'OriginForecast',
    'ThetaMode',
    'compose_draws',
    'conditional_moments',
    'default_theta_mode',
    'forecast_origin',
    'iter_recursive',
    'pca_factors',
    'recursive_exercise',
    'simulate_forecast'
]
