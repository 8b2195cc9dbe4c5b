"""
Simulation of inhomogeneous Poisson process paths by thinning.

A path on [0, tau] is drawn from a homogeneous process of rate
intensity_bound(θ) and each candidate t is kept with probability
λ(θ, t)/intensity_bound(θ).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List

import numpy as np

from .errors import DomainError
from .intensity import IntensityModel, check_theta
from .models import Experiment, PathSample
from .streams import check_seed, substream

logger = logging.getLogger(__name__)


def sample_path(model: IntensityModel, theta: float, stream: np.random.Generator) -> PathSample:
    """
    Draw one path with intensity λ(θ, ·) on [0, tau].

    Args:
        model: Intensity family
        theta: Generating parameter in [theta1, b)
        stream: Generator the draws are taken from; the result is a function
            of its state

    Returns:
        PathSample with strictly increasing event times
    """
    check_theta(model, theta)
    bound = model.intensity_bound(theta)
    while True:
        count = stream.poisson(bound * model.tau)
        candidates = np.sort(stream.uniform(0.0, model.tau, size=count))
        keep = stream.uniform(size=count) * bound < model.intensity(theta, candidates)
        events = candidates[keep]
        if events.size < 2 or np.all(np.diff(events) > 0.0):
            return PathSample(events=events)
        logger.debug("tied event times drawn for theta=%g, redrawing", theta)


def sample_experiment(
    model: IntensityModel, theta: float, n: int, seed: int, jobs: int = 1
) -> Experiment:
    """
    Draw n independent paths; path j (1-based) uses the sub-stream (seed, j).

    Args:
        model: Intensity family
        theta: Generating parameter in [theta1, b)
        n: Number of paths
        seed: Root seed (64-bit unsigned)
        jobs: Threads drawing paths concurrently; the result does not depend on it

    Returns:
        Experiment holding the n paths
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    check_theta(model, theta)
    seed = check_seed(seed)

    def draw(j: int) -> PathSample:
        return sample_path(model, theta, substream(seed, j))

    indices = range(1, n + 1)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            paths: List[PathSample] = list(pool.map(draw, indices))
    else:
        paths = [draw(j) for j in indices]

    return Experiment(
        paths=tuple(paths), theta_true=theta, seed=seed, tau=model.tau, source_model=model.name
    )
