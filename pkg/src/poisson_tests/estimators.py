"""
One-sided maximum likelihood and Bayes (posterior mean) estimators of θ.

Both work on a uniform θ grid over [theta1, b − δ] with δ = (b − theta1)·1e-6.
The MLE refines the best grid cell by golden-section search; the Bayes
estimator integrates on the grid with the composite Simpson rule after
subtracting the grid maximum of ln L.
"""

import logging
import math
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError, NumericError
from .intensity import IntensityModel
from .likelihood import log_likelihood_profile, log_likelihood_ratio
from .models import EstimateReport, Experiment, LocalScale
from .priors import PriorDensity

logger = logging.getLogger(__name__)

MLE_GRID_POINTS = 512
BAYES_QUAD_POINTS = 2048
GOLDEN_TOLERANCE = 1e-8
RIGHT_MARGIN = 1e-6

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def right_edge(model: IntensityModel) -> float:
    """b − δ, the largest parameter value the estimators evaluate."""
    return model.b - (model.b - model.theta1) * RIGHT_MARGIN


# ==================== Maximum Likelihood ====================


def _golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> Tuple[float, float, int]:
    """Maximize a unimodal f on [lo, hi]; returns (argmax, max, evaluations)."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evaluations = 2
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        evaluations += 1
    if fc >= fd:
        return c, fc, evaluations
    return d, fd, evaluations


def mle(
    model: IntensityModel, experiment: Experiment, grid_points: int = MLE_GRID_POINTS
) -> EstimateReport:
    """
    One-sided MLE of θ over [theta1, b).

    Scans ln L on grid_points values over [theta1, b − δ], then refines the
    cell around the best grid value by golden-section search to 1e-8 in θ.
    theta1 is returned when the grid maximum is at the left edge and the
    refinement does not improve on it. Surfaces with several modes are
    resolved only up to the grid spacing.

    Raises:
        DomainError: If grid_points < 16
    """
    if grid_points < 16:
        raise DomainError(f"grid_points must be at least 16, got {grid_points}")
    edge = right_edge(model)
    grid = np.linspace(model.theta1, edge, grid_points)
    values = log_likelihood_profile(model, grid, experiment, cache_totals=True)
    k = int(np.argmax(values))

    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid_points - 1)]
    theta_ref, value_ref, evaluations = _golden_section_max(
        lambda th: log_likelihood_ratio(model, th, experiment), lo, hi, GOLDEN_TOLERANCE
    )
    evaluations += grid_points

    if value_ref > values[k]:
        theta_hat, value = float(theta_ref), float(value_ref)
    else:
        theta_hat, value = float(grid[k]), float(values[k])
    if k == 0 and value_ref <= values[0]:
        theta_hat, value = model.theta1, 0.0

    at_right = bool(theta_hat >= edge - GOLDEN_TOLERANCE)
    if at_right:
        logger.debug("MLE at the right edge b - delta = %g", edge)
    return EstimateReport(
        theta_hat=theta_hat,
        log_lik_at_hat=value,
        evaluations=evaluations,
        at_right_boundary=at_right,
    )


# ==================== Bayes Estimator ====================


class PosteriorIntegrals(NamedTuple):
    """Grid integrals shared by the Bayes estimator and the averaged likelihood ratio."""

    grid: np.ndarray
    shift: float
    mass: float
    first_moment: float

    @property
    def log_averaged_likelihood(self) -> float:
        """ln ∫ p(θ)·L(θ, θ₁, Xⁿ) dθ."""
        return self.shift + math.log(self.mass)


def posterior_integrals(
    model: IntensityModel,
    prior: PriorDensity,
    experiment: Experiment,
    quad_points: int = BAYES_QUAD_POINTS,
) -> PosteriorIntegrals:
    """
    Simpson integrals of p·L and θ·p·L over [theta1, b − δ], scaled by exp(−shift).

    Raises:
        DomainError: If quad_points < 64
        NumericError: If the scaled mass underflows to zero or is not finite
    """
    if quad_points < 64:
        raise DomainError(f"quad_points must be at least 64, got {quad_points}")
    grid = np.linspace(model.theta1, right_edge(model), quad_points + 1)
    log_lik = log_likelihood_profile(model, grid, experiment, cache_totals=True)
    shift = float(np.max(log_lik))
    weights = np.exp(log_lik - shift) * prior.density(grid)
    mass = float(simpson(weights, x=grid))
    if not (math.isfinite(mass) and mass > 0.0):
        raise NumericError(
            "posterior mass vanished on the grid; the prior puts no weight where the data do"
        )
    first_moment = float(simpson(grid * weights, x=grid))
    return PosteriorIntegrals(grid=grid, shift=shift, mass=mass, first_moment=first_moment)


def bayes_estimator(
    model: IntensityModel,
    scale: LocalScale,
    prior: PriorDensity,
    experiment: Experiment,
    quad_points: int = BAYES_QUAD_POINTS,
    integrals: Optional[PosteriorIntegrals] = None,
) -> EstimateReport:
    """
    Posterior mean ∫θ·p(θ)·L dθ / ∫p(θ)·L dθ over [theta1, b).

    The integrals are taken in θ; the local-coordinate form follows by
    θ = θ₁ + vφₙ, so scale is only checked for consistency. Integrals already
    computed for this experiment and prior may be passed in.
    """
    if scale.theta1 != model.theta1:
        raise DomainError(f"scale built for theta1={scale.theta1}, model has {model.theta1}")
    if integrals is None:
        integrals = posterior_integrals(model, prior, experiment, quad_points)
    theta_hat = integrals.first_moment / integrals.mass
    theta_hat = min(max(theta_hat, model.theta1), right_edge(model))
    return EstimateReport(
        theta_hat=theta_hat,
        log_lik_at_hat=log_likelihood_ratio(model, theta_hat, experiment),
        evaluations=integrals.grid.size,
    )
