"""
Run configuration shared by the CLI commands.

A RunConfig mirrors the command-line flags. It can be read from a JSON file;
flags given on the command line override the file values.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from .errors import ConfigError
from .estimators import BAYES_QUAD_POINTS, MLE_GRID_POINTS
from .hypothesis_tests import DEFAULT_DRAWS, MIN_DRAWS
from .intensity import IntensityModel, get_model
from .models import TestKind, ThresholdMode
from .power import DEFAULT_REPLICATES, MIN_REPLICATES, TestOptions
from .priors import PriorDensity, TriangularPrior, UniformPrior, register_prior
from .storage import load_prior_table, load_table_model
from .streams import SEED_LIMIT

logger = logging.getLogger(__name__)

OUTPUT_ENVVAR = "POISSON_TESTS_OUTPUT"


class PriorKind(str, Enum):
    """Prior density families accepted on the command line."""
    UNIFORM = "uniform"
    TRIANGULAR = "triangular"
    TABLE = "table"


class PriorSpec(BaseModel):
    """
    Prior density description; missing bounds default to [theta1, b].

    A path without a kind selects the table family.
    """
    model_config = ConfigDict(frozen=True)

    kind: PriorKind = Field(default=PriorKind.UNIFORM, description="Density family")
    lower: Optional[float] = Field(default=None, description="Left end of the support")
    upper: Optional[float] = Field(default=None, description="Right end of the support")
    mode: Optional[float] = Field(default=None, description="Peak of a triangular prior")
    path: Optional[Path] = Field(default=None, description="CSV table theta,density")

    @model_validator(mode="before")
    @classmethod
    def _infer_table(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("path") is not None and data.get("kind") is None:
            return {**data, "kind": PriorKind.TABLE}
        return data

    @model_validator(mode="after")
    def _check_kind(self) -> "PriorSpec":
        if self.kind is PriorKind.TRIANGULAR and self.mode is None:
            raise ValueError("a triangular prior needs a mode")
        if self.kind is PriorKind.TABLE and self.path is None:
            raise ValueError("a table prior needs a path")
        if self.path is not None and self.kind is not PriorKind.TABLE:
            raise ValueError(f"a prior path is only read by a table prior, not {self.kind.value}")
        return self

    def build(self, model: IntensityModel) -> PriorDensity:
        """
        Construct the density for a model and check it integrates to one.

        Raises:
            ConfigError: If the prior is malformed or not normalized on [theta1, b]
        """
        if self.kind is PriorKind.TABLE:
            prior = load_prior_table(self.path)
        else:
            lower = model.theta1 if self.lower is None else self.lower
            upper = model.b if self.upper is None else self.upper
            try:
                if self.kind is PriorKind.TRIANGULAR:
                    prior = TriangularPrior(lower=lower, upper=upper, mode=self.mode)
                else:
                    prior = UniformPrior(lower=lower, upper=upper)
            except ValidationError as e:
                raise ConfigError(f"invalid {self.kind.value} prior: {e}") from e
        return register_prior(prior, model)


class RunConfig(BaseModel):
    """All settings of one CLI run."""
    model_config = ConfigDict(frozen=True)

    model: str = Field(default="paper", description="Registry key of the intensity model")
    intensity_table: Optional[Path] = Field(
        default=None, description="CSV table theta,t,lambda replacing the registry model"
    )
    theta1: Optional[float] = Field(default=None, description="Override of the null value")
    n: int = Field(default=100, ge=1, description="Paths per experiment")
    N: int = Field(default=DEFAULT_REPLICATES, ge=MIN_REPLICATES, description="Replicates")
    M: int = Field(default=DEFAULT_DRAWS, ge=MIN_DRAWS, description="Threshold draws")
    epsilons: List[float] = Field(default_factory=lambda: [0.05], description="Nominal sizes")
    u_start: float = Field(default=0.0, ge=0, description="First local alternative")
    u_stop: float = Field(default=6.0, ge=0, description="Last local alternative")
    u_count: int = Field(default=13, ge=1, description="Number of grid points")
    seed: int = Field(default=0, ge=0, lt=SEED_LIMIT, description="Root seed")
    tests: List[TestKind] = Field(
        default_factory=lambda: list(TestKind), description="Tests to run"
    )
    prior: PriorSpec = Field(default_factory=PriorSpec, description="Prior for BT1/BT2")
    output_dir: Path = Field(default=Path("output"), description="Directory for CSV output")
    jobs: int = Field(default=1, ge=1, description="Worker processes for power runs")
    quad_points: int = Field(default=BAYES_QUAD_POINTS, ge=64, description="Bayes grid intervals")
    grid_points: int = Field(default=MLE_GRID_POINTS, ge=16, description="MLE scan points")
    closed_form: bool = Field(default=False, description="Closed-form BT1/BT2 thresholds")

    @field_validator("epsilons")
    @classmethod
    def _check_epsilons(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("at least one epsilon is required")
        for eps in values:
            if not 0.0 < eps < 1.0:
                raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
        return values

    @field_validator("tests")
    @classmethod
    def _check_tests(cls, values: List[TestKind]) -> List[TestKind]:
        if not values:
            raise ValueError("at least one test is required")
        return list(dict.fromkeys(values))

    @model_validator(mode="after")
    def _check_grid(self) -> "RunConfig":
        if self.u_count > 1 and not self.u_stop > self.u_start:
            raise ValueError(f"u_stop={self.u_stop} must exceed u_start={self.u_start}")
        return self

    @property
    def threshold_mode(self) -> ThresholdMode:
        return ThresholdMode.CLOSED_FORM if self.closed_form else ThresholdMode.MONTE_CARLO

    @property
    def needs_prior(self) -> bool:
        return any(kind.is_bayes for kind in self.tests)

    def u_grid(self) -> List[float]:
        """Evenly spaced local alternatives from u_start to u_stop."""
        if self.u_count == 1:
            return [self.u_start]
        return [float(u) for u in np.linspace(self.u_start, self.u_stop, self.u_count)]

    def resolve_model(self) -> IntensityModel:
        """
        The configured intensity model.

        Raises:
            ConfigError: If the registry key or table is invalid
        """
        if self.intensity_table is not None:
            model = load_table_model(self.intensity_table, name=self.model)
            return model.with_theta1(self.theta1) if self.theta1 is not None else model
        return get_model(self.model, self.theta1)

    def resolve_prior(self, model: IntensityModel) -> Optional[PriorDensity]:
        """The registered prior when a Bayes test is requested, else None."""
        return self.prior.build(model) if self.needs_prior else None

    def test_options(self) -> TestOptions:
        return TestOptions(
            M=self.M,
            threshold_seed=self.seed,
            quad_points=self.quad_points,
            grid_points=self.grid_points,
            mode=self.threshold_mode,
            jobs=self.jobs,
        )

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """
        Copy with every non-None override applied and revalidated.

        Raises:
            ConfigError: If the merged settings are invalid
        """
        values = self.model_dump()
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return RunConfig.model_validate(values)
        except ValidationError as e:
            raise ConfigError(f"invalid settings: {e}") from e


def load_config(path: Optional[Path]) -> RunConfig:
    """
    Read a JSON run configuration; defaults when no path is given.

    Raises:
        ConfigError: If the file is missing or invalid
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: config file not found")
    try:
        config = RunConfig.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigError(f"{path}: invalid config: {e}") from e
    logger.info("loaded config from %s", path)
    return config
