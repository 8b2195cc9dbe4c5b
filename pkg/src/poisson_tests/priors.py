"""
Prior densities on the parameter interval [theta1, b).

Priors are registered against a model: registration integrates the density
over [theta1, b] piece by piece between its knots and rejects priors whose mass
differs from one by more than 1e-6.
"""

import logging
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import ConfigError, DomainError
from .intensity import IntensityModel
from .quadrature import piecewise_simpson

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-6


class PriorDensity(BaseModel):
    """Density p(θ) supported on [lower, upper], zero outside."""
    model_config = ConfigDict(frozen=True)

    lower: float = Field(description="Left end of the support")
    upper: float = Field(description="Right end of the support")

    @model_validator(mode="after")
    def _check_support(self) -> "PriorDensity":
        if not self.lower < self.upper:
            raise ValueError(f"prior support [{self.lower}, {self.upper}] is empty")
        return self

    def density(self, theta) -> np.ndarray:
        raise NotImplementedError

    def knots(self) -> List[float]:
        """Points where the density may fail to be smooth."""
        return [self.lower, self.upper]


class UniformPrior(PriorDensity):
    """Uniform density on [lower, upper]."""

    def density(self, theta):
        theta = np.asarray(theta, dtype=float)
        inside = (theta >= self.lower) & (theta <= self.upper)
        return np.where(inside, 1.0 / (self.upper - self.lower), 0.0)


class TriangularPrior(PriorDensity):
    """Triangular density on [lower, upper] peaking at mode."""

    mode: float = Field(description="Location of the peak")

    @model_validator(mode="after")
    def _check_mode(self) -> "TriangularPrior":
        if not self.lower <= self.mode <= self.upper:
            raise ValueError(f"mode={self.mode} outside [{self.lower}, {self.upper}]")
        return self

    def density(self, theta):
        theta = np.asarray(theta, dtype=float)
        lo, mode, hi = self.lower, self.mode, self.upper
        peak = 2.0 / (hi - lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            rising = np.where(mode > lo, peak * (theta - lo) / (mode - lo), peak)
            falling = np.where(hi > mode, peak * (hi - theta) / (hi - mode), peak)
        value = np.where(theta <= mode, rising, falling)
        return np.where((theta >= lo) & (theta <= hi), value, 0.0)

    def knots(self):
        return [self.lower, self.mode, self.upper]


class TabulatedPrior(PriorDensity):
    """Density given at nodes, linearly interpolated, zero outside the nodes."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nodes: np.ndarray
    values: np.ndarray

    @model_validator(mode="after")
    def _check_table(self) -> "TabulatedPrior":
        if self.nodes.shape != self.values.shape or self.nodes.size < 2:
            raise ValueError("prior table needs matching theta and density columns")
        if not np.all(np.diff(self.nodes) > 0):
            raise ValueError("prior table theta values must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("prior density must be nonnegative")
        return self

    def density(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.interp(theta, self.nodes, self.values, left=0.0, right=0.0)

    def knots(self):
        return [float(x) for x in self.nodes]


def prior_mass(prior: PriorDensity, model: IntensityModel) -> float:
    """∫ p(θ) dθ over [theta1, b]."""
    lo, hi = model.theta1, model.b
    points = [lo, hi] + [k for k in prior.knots() if lo < k < hi]
    return piecewise_simpson(prior.density, points)


def register_prior(prior: PriorDensity, model: IntensityModel) -> PriorDensity:
    """
    Check that the prior is a density on the model's parameter interval.

    Raises:
        ConfigError: If the mass over [theta1, b] is not one within 1e-6
    """
    mass = prior_mass(prior, model)
    if abs(mass - 1.0) > NORMALIZATION_TOLERANCE:
        raise ConfigError(
            f"prior integrates to {mass:.9f} over [{model.theta1}, {model.b}], expected 1"
        )
    logger.debug("registered %s for model %s", type(prior).__name__, model.name)
    return prior


def check_null_support(prior: PriorDensity, model: IntensityModel) -> float:
    """
    Return p(θ₁), which the Bayes tests need to be positive.

    Raises:
        DomainError: If p(θ₁) is not positive
    """
    value = float(prior.density(model.theta1))
    if not value > 0.0:
        raise DomainError(f"prior density at theta1={model.theta1} must be positive")
    return value
