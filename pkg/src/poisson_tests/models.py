"""
Pydantic records shared across the package.

Defines the value types produced by the library (local scales, sampled paths,
experiments, estimates, decisions) and the rows written to CSV by the CLI.
"""

import math
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class TestKind(str, Enum):
    """The five decision procedures."""
    __test__ = False

    SFT = "SFT"
    GLRT = "GLRT"
    WALD = "WALD"
    BT1 = "BT1"
    BT2 = "BT2"

    @property
    def is_bayes(self) -> bool:
        return self in (TestKind.BT1, TestKind.BT2)


class ThresholdMode(str, Enum):
    """How BT1/BT2 thresholds are obtained."""
    MONTE_CARLO = "monte-carlo"
    CLOSED_FORM = "closed-form"


# ==================== Model Functionals ====================


class LocalScale(BaseModel):
    """
    Normalization of the local alternatives θ₁ + u·φₙ.

    Built by intensity.local_scale; u ranges over [0, u_max).
    """
    model_config = ConfigDict(frozen=True)

    theta1: float = Field(description="Null-hypothesis parameter value")
    fisher: float = Field(gt=0, description="Fisher information I(θ₁)")
    phi_n: float = Field(gt=0, description="Local scale 1/sqrt(n·I(θ₁))")
    n: int = Field(ge=1, description="Number of observed paths")
    u_max: float = Field(gt=0, description="Right end of the local parameter set")

    @model_validator(mode="after")
    def _check_phi(self) -> "LocalScale":
        expected = 1.0 / math.sqrt(self.n * self.fisher)
        if not math.isclose(self.phi_n, expected, rel_tol=1e-12):
            raise ValueError(f"phi_n={self.phi_n} does not equal 1/sqrt(n*fisher)={expected}")
        return self

    def theta_at(self, u: float) -> float:
        """Parameter value of the local alternative u."""
        return self.theta1 + u * self.phi_n

    def u_of(self, theta: float) -> float:
        """Local coordinate of a parameter value."""
        return (theta - self.theta1) / self.phi_n


# ==================== Sampled Data ====================


class PathSample(BaseModel):
    """Event times of one observed path, strictly increasing."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    events: np.ndarray = Field(description="Sorted event times in [0, tau]")

    @field_validator("events", mode="before")
    @classmethod
    def _as_float_array(cls, value) -> np.ndarray:
        events = np.array(value, dtype=float)
        if events.ndim != 1:
            raise ValueError("events must be one-dimensional")
        if events.size and events[0] < 0.0:
            raise ValueError("event times must be nonnegative")
        if events.size > 1 and not np.all(np.diff(events) > 0.0):
            raise ValueError("event times must be strictly increasing")
        events.setflags(write=False)
        return events

    def __len__(self) -> int:
        return int(self.events.size)


class ExperimentMetadata(BaseModel):
    """Sidecar record written next to an experiment CSV."""
    model: str = Field(description="Registry key of the generating model")
    theta: float = Field(description="Generating parameter value")
    n: int = Field(ge=1, description="Number of paths")
    seed: int = Field(ge=0, description="Root seed of the experiment")
    tau: float = Field(gt=0, description="Observation window length")


class Experiment(BaseModel):
    """n independent paths observed on [0, tau]."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    paths: Tuple[PathSample, ...] = Field(description="Observed paths, path j at index j-1")
    theta_true: float = Field(description="Generating parameter value")
    seed: int = Field(ge=0, lt=2**64, description="Root seed")
    tau: float = Field(gt=0, description="Observation window length")
    source_model: str = Field(default="", description="Registry key of the generating model")

    @model_validator(mode="after")
    def _check_paths(self) -> "Experiment":
        if not self.paths:
            raise ValueError("an experiment needs at least one path")
        for path in self.paths:
            if path.events.size and path.events[-1] > self.tau:
                raise ValueError(f"event time {path.events[-1]} exceeds tau={self.tau}")
        return self

    @property
    def n(self) -> int:
        return len(self.paths)

    @cached_property
    def events(self) -> np.ndarray:
        """All event times pooled over paths."""
        if not self.paths:
            return np.empty(0)
        return np.concatenate([p.events for p in self.paths])

    @property
    def total_events(self) -> int:
        return int(self.events.size)

    def metadata(self) -> ExperimentMetadata:
        return ExperimentMetadata(
            model=self.source_model, theta=self.theta_true, n=self.n, seed=self.seed, tau=self.tau
        )

    def to_frame(self) -> pd.DataFrame:
        """Long format with 1-based path_index, one row per event."""
        index = np.concatenate(
            [np.full(len(p), j, dtype=np.int64) for j, p in enumerate(self.paths, start=1)]
        )
        return pd.DataFrame({"path_index": index, "event_time": self.events})


# ==================== Statistics and Estimates ====================


class ScoreValue(BaseModel):
    """Value of the normalized score statistic Δₙ."""
    model_config = ConfigDict(frozen=True)

    delta_n: float = Field(description="Score statistic at θ₁")

    @field_validator("delta_n")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("score statistic must be finite")
        return value


class EstimateReport(BaseModel):
    """Point estimate of θ with its log-likelihood ratio and work counter."""
    model_config = ConfigDict(frozen=True)

    theta_hat: float = Field(description="Point estimate")
    log_lik_at_hat: float = Field(description="ln L(theta_hat, θ₁, Xⁿ)")
    evaluations: int = Field(ge=0, description="Likelihood evaluations consumed")
    at_right_boundary: bool = Field(
        default=False,
        description="Maximizer sits at b - δ, the open right end of the interval",
    )


class Decision(BaseModel):
    """Outcome of one test on one experiment; reject iff statistic > threshold."""
    model_config = ConfigDict(frozen=True)

    kind: TestKind = Field(description="Test procedure")
    statistic: float = Field(description="Test statistic")
    threshold: float = Field(description="Critical value")
    reject: bool = Field(description="Whether H1 is rejected")
    epsilon: float = Field(gt=0, lt=1, description="Nominal size")

    @model_validator(mode="after")
    def _check_reject(self) -> "Decision":
        if self.reject != (self.statistic > self.threshold):
            raise ValueError("reject must equal statistic > threshold")
        return self

    @classmethod
    def of(cls, kind: TestKind, statistic: float, threshold: float, epsilon: float) -> "Decision":
        return cls(
            kind=kind,
            statistic=statistic,
            threshold=threshold,
            reject=statistic > threshold,
            epsilon=epsilon,
        )


# ==================== Output Rows ====================


class ThresholdRow(BaseModel):
    """One row of a ThresholdTable CSV."""
    test: TestKind = Field(description="Test procedure")
    epsilon: float = Field(gt=0, lt=1, description="Nominal size")
    threshold: float = Field(description="Critical value")
    M: int = Field(ge=0, description="Monte Carlo draws, 0 for closed forms")
    seed: int = Field(ge=0, description="Calibration seed")

    def to_csv_row(self) -> Dict:
        return {
            "test": self.test.value,
            "epsilon": self.epsilon,
            "threshold": self.threshold,
            "M": self.M,
            "seed": self.seed,
        }


class PowerPoint(BaseModel):
    """Empirical power at one local alternative u."""
    model_config = ConfigDict(frozen=True)

    u: float = Field(ge=0, description="Local alternative")
    beta_hat: float = Field(ge=0, le=1, description="Rejection frequency")
    ci_lo: float = Field(ge=0, le=1, description="Lower end of the 95% Wilson interval")
    ci_hi: float = Field(ge=0, le=1, description="Upper end of the 95% Wilson interval")
    ci_half_width: float = Field(ge=0, description="Half-width of the Wilson interval")
    N: int = Field(ge=1, description="Replicates")
    n: int = Field(ge=1, description="Paths per replicate")
    rejections: int = Field(ge=0, description="Number of rejecting replicates")


class PowerCurve(BaseModel):
    """Power estimates of one test over a grid of local alternatives."""
    model_config = ConfigDict(frozen=True)

    kind: TestKind = Field(description="Test procedure")
    epsilon: float = Field(gt=0, lt=1, description="Nominal size")
    model: str = Field(description="Registry key of the model")
    seed: int = Field(ge=0, description="Root seed")
    points: List[PowerPoint] = Field(description="Estimates sorted by u")

    @field_validator("points")
    @classmethod
    def _increasing(cls, points: List[PowerPoint]) -> List[PowerPoint]:
        us = [p.u for p in points]
        if any(b <= a for a, b in zip(us, us[1:])):
            raise ValueError("u values must be strictly increasing")
        return points

    def to_csv_rows(self) -> List[Dict]:
        return [
            {
                "test": self.kind.value,
                "epsilon": self.epsilon,
                "n": p.n,
                "N": p.N,
                "u": p.u,
                "beta_hat": p.beta_hat,
                "ci_lo": p.ci_lo,
                "ci_hi": p.ci_hi,
                "seed": self.seed,
            }
            for p in self.points
        ]

    def beta(self) -> np.ndarray:
        return np.array([p.beta_hat for p in self.points])

    def point_at(self, u: float) -> Optional[PowerPoint]:
        return next((p for p in self.points if p.u == u), None)
