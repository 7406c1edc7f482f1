"""Linear Gaussian state-space models: filtering, smoothing, estimation, forecasting."""

__version__ = "0.1.0"

from .builders import linear_trend, local_level, structural
from .estimation import (
    FittedStateSpace,
    OptimizerConfig,
    RandomSeedsLBFGS,
    decode,
    encode,
    estimate,
    evaluate,
    fit,
    log_likelihood,
)
from .exceptions import (
    ArtifactError,
    DimensionError,
    EstimationError,
    ForecastError,
    SingularInnovationError,
    StateSpaceError,
)
from .kalman import FilterConfig, FilterOutput, detect_steady_state, run_filter, run_sqrt_filter
from .model import NoiseCovariances, StateSpaceModel, new_state_space_model, z_at
from .prediction import ForecastOutput, ScenarioSet, forecast, scenario_quantiles, simulate
from .smoother import SmootherOutput, run_smoother, smoothed_components

__all__ = [
    "ArtifactError", "DimensionError", "EstimationError", "FilterConfig", "FilterOutput",
    "FittedStateSpace", "ForecastError", "ForecastOutput", "NoiseCovariances", "OptimizerConfig",
    "RandomSeedsLBFGS", "ScenarioSet", "SingularInnovationError", "SmootherOutput",
    "StateSpaceError", "StateSpaceModel", "decode", "detect_steady_state", "encode", "estimate",
    "evaluate", "fit", "forecast", "linear_trend", "local_level", "log_likelihood",
    "new_state_space_model", "run_filter", "run_smoother", "run_sqrt_filter", "scenario_quantiles",
    "simulate", "smoothed_components", "structural", "z_at",
]
