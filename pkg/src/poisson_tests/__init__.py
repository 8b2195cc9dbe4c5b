"""
poisson-tests - asymptotic tests for inhomogeneous Poisson intensities

Simulates n independent paths of an inhomogeneous Poisson process with
intensity λ(θ, t) and tests H1: θ = θ₁ against θ > θ₁ with the score
function, generalized likelihood ratio, Wald and two Bayes tests. Includes
Monte Carlo threshold calibration and power curves on local alternatives.
"""

from .errors import ConfigError, DomainError, NumericError, PoissonTestsError
from .models import (
    Decision,
    EstimateReport,
    Experiment,
    LocalScale,
    PathSample,
    PowerCurve,
    PowerPoint,
    ScoreValue,
    TestKind,
    ThresholdMode,
    ThresholdRow,
)
from .intensity import (
    MODEL_REGISTRY,
    IntensityModel,
    cumulative_intensity,
    fisher_information,
    get_model,
    local_scale,
    register_model,
)
from .simulation import sample_experiment, sample_path
from .likelihood import log_likelihood_ratio, score_statistic, score_drift, z_n
from .priors import TriangularPrior, TabulatedPrior, UniformPrior, register_prior
from .estimators import bayes_estimator, mle
from .hypothesis_tests import (
    bt1,
    bt1_threshold,
    bt2,
    bt2_threshold,
    glrt,
    run_test,
    sft,
    threshold_for,
    wald,
)
from .power import (
    estimate_power,
    estimate_powers,
    limit_power,
    limit_power_bt1,
    limit_power_bt2,
    limit_power_star,
    power_curve,
    power_curves,
)

__version__ = "0.1.0"
__all__ = [
    "PoissonTestsError",
    "DomainError",
    "NumericError",
    "ConfigError",
    "Decision",
    "EstimateReport",
    "Experiment",
    "LocalScale",
    "PathSample",
    "PowerCurve",
    "PowerPoint",
    "ScoreValue",
    "TestKind",
    "ThresholdMode",
    "ThresholdRow",
    "MODEL_REGISTRY",
    "IntensityModel",
    "cumulative_intensity",
    "fisher_information",
    "get_model",
    "local_scale",
    "register_model",
    "sample_experiment",
    "sample_path",
    "log_likelihood_ratio",
    "score_statistic",
    "score_drift",
    "z_n",
    "TriangularPrior",
    "TabulatedPrior",
    "UniformPrior",
    "register_prior",
    "bayes_estimator",
    "mle",
    "bt1",
    "bt1_threshold",
    "bt2",
    "bt2_threshold",
    "glrt",
    "run_test",
    "sft",
    "threshold_for",
    "wald",
    "estimate_power",
    "estimate_powers",
    "limit_power",
    "limit_power_bt1",
    "limit_power_bt2",
    "limit_power_star",
    "power_curve",
    "power_curves",
]
