"""
Pytest fixtures for poisson_tests tests.

Provides the registered models, a uniform prior, seeded experiments and
small on-disk tables.
"""

import numpy as np
import pytest

from poisson_tests.intensity import ConstantModel, get_model, local_scale
from poisson_tests.models import Experiment, PathSample
from poisson_tests.priors import UniformPrior, register_prior
from poisson_tests.simulation import sample_experiment


@pytest.fixture(scope="session")
def paper_model():
    """λ(θ, t) = 3cos²(θt) + 1 with θ₁=3, b=7, τ=3."""
    return get_model("paper")


@pytest.fixture(scope="session")
def linear_model():
    """λ(θ, t) = θ with θ₁=1, b=5, τ=3."""
    return get_model("linear")


@pytest.fixture(scope="session")
def unit_rate_model():
    """Homogeneous rate 1 on [0, 3]."""
    return ConstantModel(name="unit", theta1=0.0, b=1.0, tau=3.0, lambda_min=1.0, level=1.0)


@pytest.fixture(scope="session")
def uniform_prior(paper_model):
    """Uniform density on [3, 7]."""
    return register_prior(UniformPrior(lower=3.0, upper=7.0), paper_model)


@pytest.fixture(scope="session")
def paper_scale_100(paper_model):
    return local_scale(paper_model, 100)


@pytest.fixture(scope="session")
def null_experiment(paper_model):
    """100 paths at θ = θ₁, seed 1."""
    return sample_experiment(paper_model, 3.0, 100, seed=1)


@pytest.fixture(scope="session")
def alternative_experiment(paper_model, paper_scale_100):
    """100 paths at u = 3, seed 2."""
    return sample_experiment(paper_model, paper_scale_100.theta_at(3.0), 100, seed=2)


@pytest.fixture
def tiny_experiment():
    """Two hand-written paths on [0, 3], one of them empty."""
    return Experiment(
        paths=(PathSample(events=[0.25, 1.0, 2.5]), PathSample(events=[])),
        theta_true=3.0,
        seed=5,
        tau=3.0,
        source_model="paper",
    )


@pytest.fixture
def model_table_csv(tmp_path):
    """Intensity table λ(θ, t) = θ·t + 1 on a 5x7 grid over [0, 2] x [0, 3]."""
    rows = ["theta,t,lambda"]
    for theta in np.linspace(0.0, 2.0, 5):
        for t in np.linspace(0.0, 3.0, 7):
            rows.append(f"{theta},{t},{theta * t + 1.0}")
    path = tmp_path / "slope_table.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


@pytest.fixture
def prior_table_csv(tmp_path):
    """Uniform density on [3, 7] as a two-node table."""
    path = tmp_path / "prior.csv"
    path.write_text("theta,density\n3.0,0.25\n7.0,0.25\n")
    return path


@pytest.fixture
def output_directory(tmp_path):
    """Create an empty output directory."""
    output_dir = tmp_path / "output"
    output_dir.mkdir()
    return output_dir
