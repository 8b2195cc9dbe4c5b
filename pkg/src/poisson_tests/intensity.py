"""
Parametric intensity families and their deterministic functionals.

Each family describes λ(θ, t) on [0, τ] for θ in [theta1, b), its θ-derivative
λ̇(θ, t) and a finite bound of t ↦ λ(θ, t) used by the thinning sampler.
Functionals: cumulative intensity Λ(θ, t), Fisher information I(θ) and the
local scale φₙ = 1/sqrt(n·I(θ₁)).
"""

import logging
import math
from typing import Callable, Dict, Hashable, Optional, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PrivateAttr,
    ValidationError,
    model_validator,
)
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError, DomainError, NumericError
from .models import LocalScale
from .quadrature import adaptive_simpson

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

CUMULATIVE_TOLERANCE = 1e-10
FISHER_TOLERANCE = 1e-8
AUDIT_GRID = 512


# ==================== Intensity Families ====================


class IntensityModel(BaseModel):
    """
    A θ-parametrized intensity family on [0, tau].

    Subclasses implement intensity, intensity_derivative and intensity_bound;
    all three broadcast over NumPy arrays of θ and t.
    """
    model_config = ConfigDict(frozen=True)

    name: str = Field(description="Registry key")
    theta1: float = Field(description="Null-hypothesis value, left end of the interval")
    b: float = Field(description="Right end of the parameter interval (open)")
    tau: float = Field(gt=0, description="Observation window length")
    lambda_min: float = Field(gt=0, description="Declared lower bound of the intensity")

    _cache: Dict[Hashable, float] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def _check_interval(self) -> "IntensityModel":
        if not self.theta1 < self.b:
            raise ValueError(f"theta1={self.theta1} must be below b={self.b}")
        return self

    def intensity(self, theta: ArrayLike, t: ArrayLike) -> np.ndarray:
        """λ(θ, t)."""
        raise NotImplementedError

    def intensity_derivative(self, theta: ArrayLike, t: ArrayLike) -> np.ndarray:
        """∂λ/∂θ (θ, t), a right derivative at theta1."""
        raise NotImplementedError

    def intensity_bound(self, theta: float) -> float:
        """Upper bound of t ↦ λ(θ, t) on [0, tau]."""
        raise NotImplementedError

    def cached(self, key: Hashable, compute: Callable[[], float]) -> float:
        """Memoize a deterministic functional of this model."""
        value = self._cache.get(key)
        if value is None:
            value = compute()
            self._cache[key] = value
        return value

    def with_theta1(self, theta1: float) -> "IntensityModel":
        """Copy of the family with another null value, audited."""
        if not theta1 < self.b:
            raise ConfigError(f"theta1={theta1} must be below b={self.b} for model '{self.name}'")
        try:
            clone = type(self)(**{**dict(self), "theta1": float(theta1)})
        except ValidationError as e:
            raise ConfigError(f"theta1={theta1} is invalid for model '{self.name}': {e}") from e
        audit_model(clone)
        return clone


class CosineSquaredModel(IntensityModel):
    """λ(θ, t) = amplitude·cos²(θt) + offset."""

    amplitude: float = Field(default=3.0, gt=0)
    offset: float = Field(default=1.0, gt=0)

    def intensity(self, theta, t):
        return self.amplitude * np.cos(np.multiply(theta, t)) ** 2 + self.offset

    def intensity_derivative(self, theta, t):
        return -self.amplitude * np.asarray(t) * np.sin(2.0 * np.multiply(theta, t))

    def intensity_bound(self, theta):
        return self.amplitude + self.offset


class LinearModel(IntensityModel):
    """λ(θ, t) = θ, constant in time."""

    def intensity(self, theta, t):
        return np.broadcast_to(np.asarray(theta, dtype=float), np.broadcast(theta, t).shape)

    def intensity_derivative(self, theta, t):
        return np.ones(np.broadcast(theta, t).shape)

    def intensity_bound(self, theta):
        return float(theta)


class SlopeModel(IntensityModel):
    """λ(θ, t) = θ·t + intercept."""

    intercept: float = Field(default=1.0, gt=0)

    def intensity(self, theta, t):
        return np.multiply(theta, t) + self.intercept

    def intensity_derivative(self, theta, t):
        return np.broadcast_to(np.asarray(t, dtype=float), np.broadcast(theta, t).shape)

    def intensity_bound(self, theta):
        return max(theta * self.tau, 0.0) + self.intercept


class ConstantModel(IntensityModel):
    """λ(θ, t) = level, independent of θ; its Fisher information is zero."""

    level: float = Field(default=2.0, gt=0)

    def intensity(self, theta, t):
        return np.full(np.broadcast(theta, t).shape, self.level)

    def intensity_derivative(self, theta, t):
        return np.zeros(np.broadcast(theta, t).shape)

    def intensity_bound(self, theta):
        return self.level


class TableModel(IntensityModel):
    """
    Intensity tabulated on a rectangular (θ, t) grid, bilinearly interpolated.

    The θ-derivative is tabulated by central differences on the θ grid
    (one-sided at the ends) and interpolated the same way.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray

    _lam: Optional[RegularGridInterpolator] = PrivateAttr(default=None)
    _dlam: Optional[RegularGridInterpolator] = PrivateAttr(default=None)
    _row_max: Optional[np.ndarray] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_grid(self) -> "TableModel":
        k, m = self.theta_grid.size, self.t_grid.size
        if k < 2 or m < 2:
            raise ValueError("table needs at least two theta and two t values")
        if self.values.shape != (k, m):
            raise ValueError(f"values must have shape ({k}, {m}), got {self.values.shape}")
        if not (np.all(np.diff(self.theta_grid) > 0) and np.all(np.diff(self.t_grid) > 0)):
            raise ValueError("theta and t grids must be strictly increasing")
        if self.t_grid[0] != 0.0 or not math.isclose(self.t_grid[-1], self.tau):
            raise ValueError("t grid must span [0, tau]")
        if self.theta1 < self.theta_grid[0] or self.b > self.theta_grid[-1]:
            raise ValueError("parameter interval must lie inside the theta grid")
        return self

    def model_post_init(self, __context) -> None:
        grid = (self.theta_grid, self.t_grid)
        derivative = np.gradient(self.values, self.theta_grid, axis=0)
        self._lam = RegularGridInterpolator(grid, self.values, method="linear")
        self._dlam = RegularGridInterpolator(grid, derivative, method="linear")
        self._row_max = self.values.max(axis=1)

    def _interpolate(self, table: RegularGridInterpolator, theta, t) -> np.ndarray:
        theta_b, t_b = np.broadcast_arrays(np.asarray(theta, float), np.asarray(t, float))
        # clip t into the grid against roundoff at tau
        points = np.stack([theta_b.ravel(), np.clip(t_b.ravel(), 0.0, self.t_grid[-1])], axis=-1)
        return table(points).reshape(theta_b.shape)

    def intensity(self, theta, t):
        return self._interpolate(self._lam, theta, t)

    def intensity_derivative(self, theta, t):
        return self._interpolate(self._dlam, theta, t)

    def intensity_bound(self, theta):
        i = int(np.clip(np.searchsorted(self.theta_grid, theta, side="right") - 1,
                        0, self.theta_grid.size - 2))
        return float(max(self._row_max[i], self._row_max[i + 1]))


# ==================== Registry ====================

MODEL_REGISTRY: Dict[str, IntensityModel] = {
    "paper": CosineSquaredModel(name="paper", theta1=3.0, b=7.0, tau=3.0, lambda_min=1.0),
    "linear": LinearModel(name="linear", theta1=1.0, b=5.0, tau=3.0, lambda_min=0.5),
    "constant-plus-slope": SlopeModel(
        name="constant-plus-slope", theta1=0.0, b=2.0, tau=3.0, lambda_min=1.0
    ),
    "constant": ConstantModel(name="constant", theta1=0.0, b=1.0, tau=3.0, lambda_min=2.0),
}


def audit_model(model: IntensityModel, grid: int = AUDIT_GRID) -> None:
    """
    Check λ_min ≤ λ(θ, t) ≤ bound(θ) on a grid × grid sample of [theta1, b) × [0, tau].

    Raises:
        ConfigError: If the model violates either bound
    """
    thetas = np.linspace(model.theta1, model.b, grid + 1)[:-1]
    ts = np.linspace(0.0, model.tau, grid)
    values = model.intensity(thetas[:, None], ts[None, :])
    if not np.all(np.isfinite(values)):
        raise ConfigError(f"model '{model.name}' has non-finite intensity values")
    low = float(values.min())
    if low < model.lambda_min:
        raise ConfigError(
            f"model '{model.name}' falls to {low:g} below its lambda_min={model.lambda_min:g}"
        )
    bounds = np.array([model.intensity_bound(th) for th in thetas])
    excess = values.max(axis=1) - bounds
    if np.any(excess > 1e-12 * np.maximum(bounds, 1.0)):
        worst = thetas[int(np.argmax(excess))]
        raise ConfigError(f"model '{model.name}' exceeds its intensity bound at theta={worst:g}")
    logger.debug("audited model %s on a %dx%d grid", model.name, grid, grid)


def register_model(model: IntensityModel) -> IntensityModel:
    """Audit a model and add it to the registry under its name."""
    audit_model(model)
    MODEL_REGISTRY[model.name] = model
    logger.info("registered model %s", model.name)
    return model


def get_model(name: str, theta1: Optional[float] = None) -> IntensityModel:
    """
    Look up a registered model, optionally with another null value.

    Raises:
        ConfigError: If the name is unknown or the override fails the audit
    """
    try:
        model = MODEL_REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(MODEL_REGISTRY))
        raise ConfigError(f"unknown model '{name}'; registered models: {known}") from None
    if theta1 is not None and theta1 != model.theta1:
        return model.with_theta1(theta1)
    return model


# ==================== Functionals ====================


def check_theta(model: IntensityModel, theta: float) -> None:
    if not model.theta1 <= theta < model.b:
        raise DomainError(
            f"theta={theta} outside the parameter interval [{model.theta1}, {model.b})"
        )


def cumulative_intensity(model: IntensityModel, theta: float, t: float) -> float:
    """
    Λ(θ, t) = ∫₀ᵗ λ(θ, s) ds by adaptive Simpson (absolute tolerance 1e-10).

    Raises:
        DomainError: If θ is outside [theta1, b) or t outside [0, tau]
    """
    check_theta(model, theta)
    if not 0.0 <= t <= model.tau:
        raise DomainError(f"t={t} outside the window [0, {model.tau}]")
    if t == model.tau:
        return total_intensity(model, theta, cache=theta == model.theta1)
    return adaptive_simpson(lambda s: model.intensity(theta, s), 0.0, t, CUMULATIVE_TOLERANCE)


def total_intensity(model: IntensityModel, theta: float, cache: bool = False) -> float:
    """Λ(θ, τ) without domain checks; memoized per θ when cache is set."""
    def compute() -> float:
        return adaptive_simpson(
            lambda s: model.intensity(theta, s), 0.0, model.tau, CUMULATIVE_TOLERANCE
        )

    if cache:
        return model.cached(("total", float(theta)), compute)
    return compute()


def fisher_information(model: IntensityModel, theta: float, tol: float = FISHER_TOLERANCE) -> float:
    """
    I(θ) = ∫₀^τ λ̇(θ, t)² / λ(θ, t) dt by adaptive Simpson.

    Raises:
        DomainError: If θ is outside [theta1, b)
        NumericError: If the quadrature fails or the information is not positive
    """
    check_theta(model, theta)

    def integrand(t: np.ndarray) -> np.ndarray:
        return model.intensity_derivative(theta, t) ** 2 / model.intensity(theta, t)

    value = adaptive_simpson(integrand, 0.0, model.tau, tol)
    if not value > 0.0:
        raise NumericError(
            f"Fisher information of model '{model.name}' at theta={theta} is {value:g}"
        )
    return value


def local_scale(model: IntensityModel, n: int) -> LocalScale:
    """
    Local scale for n paths: φₙ = 1/sqrt(n·I(θ₁)), u_max = (b − θ₁)/φₙ.

    Raises:
        DomainError: If n < 1
        NumericError: Propagated from fisher_information
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    fisher = model.cached(("fisher", model.theta1), lambda: fisher_information(model, model.theta1))
    phi_n = 1.0 / math.sqrt(n * fisher)
    return LocalScale(
        theta1=model.theta1,
        fisher=fisher,
        phi_n=phi_n,
        n=n,
        u_max=(model.b - model.theta1) / phi_n,
    )


for _builtin in MODEL_REGISTRY.values():
    audit_model(_builtin)
del _builtin
