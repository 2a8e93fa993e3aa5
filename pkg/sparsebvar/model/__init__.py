from .minnesota import (
    DummyObservations,
    MinnesotaHyper,
    PriorMoments,
    ScaleEstimates,
    build_dummies,
    estimate_scales,
    implied_prior_moments,
)
from .posterior import (
    THETA1_GRID,
    ConjugateFit,
    PosteriorDraw,
    PosteriorMoments,
    PredictiveT,
    fit_conjugate,
    general_form_moments,
    grid_search_theta,
    log_marginal_likelihood,
    one_step_predictive,
    posterior_moments,
    sample_posterior,
)
from .var_core import (
    CovMatrix,
    LagDesign,
    TimeSeriesPanel,
    VarCoefficients,
    build_lag_design,
    companion_spectral_radius,
    vec_index,
    vec_unindex,
)

__all__ = [
    'THETA1_GRID',
    'ConjugateFit',
    'CovMatrix',
    'DummyObservations',
    'LagDesign',
    'MinnesotaHyper',
    'PosteriorDraw',
    'PosteriorMoments',
    'PredictiveT',
    'PriorMoments',
    'ScaleEstimates',
    'TimeSeriesPanel',
    'VarCoefficients',
    'build_dummies',
    'build_lag_design',
    'companion_spectral_radius',
    'estimate_scales',
    'fit_conjugate',
    'general_form_moments',
    'grid_search_theta',
    'implied_prior_moments',
    'log_marginal_likelihood',
    'one_step_predictive',
    'posterior_moments',
    'sample_posterior',
    'vec_index',
    'vec_unindex'
]
