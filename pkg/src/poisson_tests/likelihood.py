"""
Likelihood-ratio machinery for n-path Poisson experiments.

ln L(θ, θ₁, Xⁿ) = Σⱼ Σᵢ ln(λ(θ, tᵢ)/λ(θ₁, tᵢ)) − n·(Λ(θ, τ) − Λ(θ₁, τ)),
Zₙ(u) = L(θ₁ + uφₙ, θ₁, Xⁿ) and the normalized score Δₙ at θ₁.
Event sums at a single θ are accumulated with math.fsum; grid profiles use
numpy pairwise summation per row.
"""

import logging
import math
from typing import Sequence, Union

import numpy as np

from .errors import DomainError
from .intensity import (
    CUMULATIVE_TOLERANCE,
    CosineSquaredModel,
    IntensityModel,
    check_theta,
    total_intensity,
)
from .models import Experiment, LocalScale, ScoreValue
from .quadrature import adaptive_simpson

logger = logging.getLogger(__name__)

# rows of the (θ × event) log-ratio matrix evaluated at once
PROFILE_CHUNK = 128


def _check_scale(model: IntensityModel, scale: LocalScale, experiment: Experiment) -> None:
    if scale.theta1 != model.theta1:
        raise DomainError(f"scale built for theta1={scale.theta1}, model has {model.theta1}")
    if scale.n != experiment.n:
        raise DomainError(f"scale built for n={scale.n}, experiment has {experiment.n} paths")


def _null_total(model: IntensityModel) -> float:
    return total_intensity(model, model.theta1, cache=True)


def log_likelihood_ratio(model: IntensityModel, theta: float, experiment: Experiment) -> float:
    """
    ln L(θ, θ₁, Xⁿ).

    Raises:
        DomainError: If θ is outside [theta1, b)
    """
    check_theta(model, theta)
    if theta == model.theta1:
        return 0.0
    events = experiment.events
    log_ratio = np.log(model.intensity(theta, events))
    log_ratio -= np.log(model.intensity(model.theta1, events))
    compensator = experiment.n * (total_intensity(model, theta) - _null_total(model))
    return math.fsum(log_ratio) - compensator


def log_likelihood_profile(
    model: IntensityModel,
    thetas: Union[Sequence[float], np.ndarray],
    experiment: Experiment,
    cache_totals: bool = False,
) -> np.ndarray:
    """
    ln L(θ, θ₁, Xⁿ) at every θ of a grid.

    With cache_totals, Λ(θ, τ) is memoized per grid value on the model, so
    repeated calls on a fixed estimator grid only pay for the event sums.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if thetas.size and (thetas.min() < model.theta1 or thetas.max() >= model.b):
        raise DomainError(f"grid leaves the parameter interval [{model.theta1}, {model.b})")

    events = experiment.events
    log_null = np.log(model.intensity(model.theta1, events))
    sums = np.empty(thetas.size)
    for start in range(0, thetas.size, PROFILE_CHUNK):
        block = thetas[start:start + PROFILE_CHUNK]
        log_ratio = np.log(model.intensity(block[:, None], events[None, :])) - log_null
        sums[start:start + block.size] = log_ratio.sum(axis=1)

    null_total = _null_total(model)
    totals = np.array([total_intensity(model, th, cache=cache_totals) for th in thetas])
    profile = sums - experiment.n * (totals - null_total)
    profile[thetas == model.theta1] = 0.0
    return profile


def z_n(model: IntensityModel, scale: LocalScale, u: float, experiment: Experiment) -> float:
    """
    Normalized likelihood ratio Zₙ(u) = L(θ₁ + uφₙ, θ₁, Xⁿ).

    Raises:
        DomainError: If u is outside [0, u_max)
    """
    if not 0.0 <= u < scale.u_max:
        raise DomainError(f"u={u} outside [0, {scale.u_max})")
    if u == 0.0:
        return 1.0
    value = log_likelihood_ratio(model, scale.theta_at(u), experiment)
    try:
        return math.exp(value)
    except OverflowError:
        return math.inf


def score_statistic(
    model: IntensityModel, scale: LocalScale, experiment: Experiment
) -> ScoreValue:
    """
    Δₙ = (n·I(θ₁))^(-1/2)·[Σ λ̇(θ₁, tᵢ)/λ(θ₁, tᵢ) − n·∫₀^τ λ̇(θ₁, t) dt].
    """
    _check_scale(model, scale, experiment)
    events = experiment.events
    theta1 = model.theta1
    ratios = model.intensity_derivative(theta1, events) / model.intensity(theta1, events)
    compensator = model.cached(
        ("score_compensator", theta1),
        lambda: adaptive_simpson(
            lambda t: model.intensity_derivative(theta1, t), 0.0, model.tau, CUMULATIVE_TOLERANCE
        ),
    )
    total = math.fsum(ratios) - experiment.n * compensator
    return ScoreValue(delta_n=total / math.sqrt(experiment.n * scale.fisher))


def score_drift(model: IntensityModel, scale: LocalScale, u: float) -> float:
    """
    Centre of Δₙ under θ₁ + uφₙ.

    sqrt(n/I(θ₁))·∫₀^τ λ̇(θ₁, t)/λ(θ₁, t)·[λ(θ₁ + uφₙ, t) − λ(θ₁, t)] dt. It is
    u + o(1) for small uφₙ but follows the oscillation of λ in θ for larger
    steps, and can turn negative at small n.
    """
    if not 0.0 <= u < scale.u_max:
        raise DomainError(f"u={u} outside [0, {scale.u_max})")
    theta1, theta = model.theta1, scale.theta_at(u)

    def integrand(t: np.ndarray) -> np.ndarray:
        null = model.intensity(theta1, t)
        return model.intensity_derivative(theta1, t) / null * (model.intensity(theta, t) - null)

    integral = adaptive_simpson(integrand, 0.0, model.tau, CUMULATIVE_TOLERANCE)
    return math.sqrt(scale.n / scale.fisher) * integral


def closed_form_log_likelihood_ratio(
    model: CosineSquaredModel, theta: float, experiment: Experiment
) -> float:
    """
    ln L for λ = A·cos²(θt) + c with Λ(θ, τ) in closed form.

    Λ(θ, τ) = (A/2 + c)·τ + A·sin(2θτ)/(4θ), so the compensator is
    n·A/4·[sin(2θτ)/θ − sin(2θ₁τ)/θ₁]. On the registered paper model this is
    Σ ln(...) − 3n/(4θ)·sin(6θ) + n/4·sin(18).
    """
    check_theta(model, theta)
    theta1, tau, amp, off = model.theta1, model.tau, model.amplitude, model.offset
    t = experiment.events
    log_ratio = np.log(amp * np.cos(theta * t) ** 2 + off)
    log_ratio -= np.log(amp * np.cos(theta1 * t) ** 2 + off)
    compensator = experiment.n * amp / 4.0 * (
        math.sin(2.0 * theta * tau) / theta - math.sin(2.0 * theta1 * tau) / theta1
    )
    return math.fsum(log_ratio) - compensator
