"""
Monte Carlo power functions and their limits.

Replicate r of a power estimate simulates the experiment seeded by
derive_seed(seed, r) at θ₁ + u·φₙ, so every test and every u sees the same
replicate streams. Replicates may run in worker processes; only rejection
counts are aggregated, so results do not depend on scheduling.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import binomtest, norm

from .errors import DomainError
from .estimators import BAYES_QUAD_POINTS, MLE_GRID_POINTS, mle, posterior_integrals
from .hypothesis_tests import (
    DEFAULT_DRAWS,
    bt1_limit_statistic,
    bt2_limit_statistic,
    normal_draws,
    run_test,
    threshold_for,
    z_quantile,
)
from .intensity import IntensityModel, local_scale
from .models import LocalScale, PowerCurve, PowerPoint, TestKind, ThresholdMode
from .priors import PriorDensity
from .simulation import sample_experiment
from .streams import check_seed, derive_seed

logger = logging.getLogger(__name__)

MIN_REPLICATES = 100
DEFAULT_REPLICATES = 10_000
CONFIDENCE = 0.95
CHUNKS_PER_JOB = 4


class TestOptions(BaseModel):
    """Numerical settings forwarded to every decision of a power run."""
    __test__ = False

    M: int = Field(default=DEFAULT_DRAWS, description="Draws for BT1/BT2 thresholds")
    threshold_seed: Optional[int] = Field(
        default=None, description="Seed of the threshold draws; the run seed when unset"
    )
    quad_points: int = Field(default=BAYES_QUAD_POINTS, description="Bayes grid intervals")
    grid_points: int = Field(default=MLE_GRID_POINTS, description="MLE scan points")
    mode: ThresholdMode = Field(default=ThresholdMode.MONTE_CARLO)
    jobs: int = Field(default=1, ge=1, description="Worker processes")


# ==================== Intervals ====================


def wilson_interval(
    rejections: int, N: int, confidence: float = CONFIDENCE
) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    ci = binomtest(rejections, N).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _power_point(u: float, rejections: int, N: int, n: int) -> PowerPoint:
    lo, hi = wilson_interval(rejections, N)
    return PowerPoint(
        u=u,
        beta_hat=rejections / N,
        ci_lo=lo,
        ci_hi=hi,
        ci_half_width=(hi - lo) / 2.0,
        N=N,
        n=n,
        rejections=rejections,
    )


# ==================== Simulation ====================


def _count_rejections(
    replicates: range,
    kinds: Tuple[TestKind, ...],
    model: IntensityModel,
    prior: Optional[PriorDensity],
    epsilon: float,
    scale: LocalScale,
    theta: float,
    seed: int,
    options: TestOptions,
) -> List[int]:
    counts = [0] * len(kinds)
    threshold_seed = seed if options.threshold_seed is None else options.threshold_seed
    needs_mle = any(k in (TestKind.GLRT, TestKind.WALD) for k in kinds)
    needs_posterior = any(k.is_bayes for k in kinds)
    for r in replicates:
        replicate_seed = derive_seed(seed, r)
        experiment = sample_experiment(model, theta, scale.n, replicate_seed)
        # one estimator pass per experiment, shared by the tests built on it
        report = mle(model, experiment, options.grid_points) if needs_mle else None
        integrals = None
        if needs_posterior:
            integrals = posterior_integrals(model, prior, experiment, options.quad_points)
        rejected = []
        for i, kind in enumerate(kinds):
            decision = run_test(
                kind, model, scale, experiment, epsilon, prior,
                M=options.M,
                seed=threshold_seed,
                quad_points=options.quad_points,
                grid_points=options.grid_points,
                mode=options.mode,
                report=report,
                integrals=integrals,
            )
            counts[i] += int(decision.reject)
            if decision.reject:
                rejected.append(kind.value)
        logger.debug("replicate %d seed=%d events=%d rejected=%s",
                     r, replicate_seed, experiment.events.size, ",".join(rejected) or "-")
    return counts


def _chunks(N: int, jobs: int) -> List[range]:
    pieces = min(N, jobs * CHUNKS_PER_JOB)
    bounds = np.linspace(0, N, pieces + 1).astype(int)
    return [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def _check_request(
    kinds: Sequence[TestKind], prior: Optional[PriorDensity], N: int
) -> None:
    if N < MIN_REPLICATES:
        raise DomainError(f"N must be at least {MIN_REPLICATES}, got {N}")
    missing = [k.value for k in kinds if k.is_bayes and prior is None]
    if missing:
        raise DomainError(f"{', '.join(missing)} need a prior density")


def estimate_powers(
    kinds: Sequence[TestKind],
    model: IntensityModel,
    prior: Optional[PriorDensity],
    epsilon: float,
    u: float,
    n: int,
    N: int = DEFAULT_REPLICATES,
    seed: int = 0,
    options: Optional[TestOptions] = None,
) -> Dict[TestKind, PowerPoint]:
    """
    Empirical power of several tests on one shared set of N experiments.

    Raises:
        DomainError: If u is outside [0, u_max), N < 100 or a Bayes test lacks a prior
    """
    options = options or TestOptions()
    kinds = tuple(kinds)
    _check_request(kinds, prior, N)
    seed = check_seed(seed)
    scale = local_scale(model, n)
    if not 0.0 <= u < scale.u_max:
        raise DomainError(f"u={u} outside [0, {scale.u_max:g}) for n={n}")
    theta = scale.theta_at(u)

    work = partial(
        _count_rejections,
        kinds=kinds, model=model, prior=prior, epsilon=epsilon,
        scale=scale, theta=theta, seed=seed, options=options,
    )
    if options.jobs > 1:
        with ProcessPoolExecutor(max_workers=options.jobs) as pool:
            partials = list(pool.map(work, _chunks(N, options.jobs)))
    else:
        partials = [work(range(N))]
    totals = np.sum(np.array(partials, dtype=np.int64), axis=0)

    points = {kind: _power_point(u, int(total), N, n) for kind, total in zip(kinds, totals)}
    for kind, point in points.items():
        logger.info("%s u=%g n=%d: beta=%.4f +/- %.4f", kind.value, u, n,
                    point.beta_hat, point.ci_half_width)
    return points


def estimate_power(
    kind: TestKind,
    model: IntensityModel,
    prior: Optional[PriorDensity],
    epsilon: float,
    u: float,
    n: int,
    N: int = DEFAULT_REPLICATES,
    seed: int = 0,
    options: Optional[TestOptions] = None,
) -> PowerPoint:
    """Empirical power of one test at the local alternative u, with a 95% Wilson interval."""
    return estimate_powers([kind], model, prior, epsilon, u, n, N, seed, options)[kind]


def _check_grid(u_grid: Sequence[float]) -> List[float]:
    grid = [float(u) for u in u_grid]
    if not grid:
        raise DomainError("u grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("u grid must be strictly increasing")
    return grid


def power_curves(
    kinds: Sequence[TestKind],
    model: IntensityModel,
    prior: Optional[PriorDensity],
    epsilon: float,
    u_grid: Sequence[float],
    n: int,
    N: int = DEFAULT_REPLICATES,
    seed: int = 0,
    options: Optional[TestOptions] = None,
) -> Dict[TestKind, PowerCurve]:
    """Power curves of several tests over u_grid on shared replicate streams."""
    grid = _check_grid(u_grid)
    points: Dict[TestKind, List[PowerPoint]] = {kind: [] for kind in kinds}
    for u in grid:
        for kind, point in estimate_powers(kinds, model, prior, epsilon, u, n, N, seed,
                                           options).items():
            points[kind].append(point)
    return {
        kind: PowerCurve(kind=kind, epsilon=epsilon, model=model.name, seed=seed, points=pts)
        for kind, pts in points.items()
    }


def power_curve(
    kind: TestKind,
    model: IntensityModel,
    prior: Optional[PriorDensity],
    epsilon: float,
    u_grid: Sequence[float],
    n: int,
    N: int = DEFAULT_REPLICATES,
    seed: int = 0,
    options: Optional[TestOptions] = None,
) -> PowerCurve:
    """Power curve of one test over a strictly increasing u grid."""
    return power_curves([kind], model, prior, epsilon, u_grid, n, N, seed, options)[kind]


# ==================== Limit Powers ====================


def _check_u(u: float) -> None:
    if u < 0:
        raise DomainError(f"u must be nonnegative, got {u}")


def limit_power_star(u: float, epsilon: float) -> float:
    """β*(u) = 1 − F(zₑ − u), the common limit of SFT, GLRT and WALD."""
    _check_u(u)
    return float(norm.sf(z_quantile(epsilon) - u))


def limit_power_bt1(u: float, epsilon: float, k_eps: float, M: int = DEFAULT_DRAWS,
                    seed: int = 0) -> float:
    """P{f(Δ+u)/F(Δ+u) + Δ + u > kₑ} over M normal draws."""
    _check_u(u)
    draws = normal_draws(M, seed)
    return float(np.mean(bt1_limit_statistic(draws + u) > k_eps))


def limit_power_bt2(u: float, epsilon: float, m_eps: float, M: int = DEFAULT_DRAWS,
                    seed: int = 0) -> float:
    """P{F(Δ+u)/f(Δ+u) > mₑ} over M normal draws."""
    _check_u(u)
    draws = normal_draws(M, seed)
    return float(np.mean(bt2_limit_statistic(draws + u) > m_eps))


def limit_power(
    kind: TestKind,
    u: float,
    epsilon: float,
    M: int = DEFAULT_DRAWS,
    seed: int = 0,
    mode: ThresholdMode = ThresholdMode.MONTE_CARLO,
) -> float:
    """Limit power of any test; Bayes thresholds come from the same draws."""
    if kind is TestKind.BT1:
        return limit_power_bt1(u, epsilon, threshold_for(kind, epsilon, M, seed, mode), M, seed)
    if kind is TestKind.BT2:
        return limit_power_bt2(u, epsilon, threshold_for(kind, epsilon, M, seed, mode), M, seed)
    return limit_power_star(u, epsilon)


def limit_curve(
    kind: TestKind,
    epsilon: float,
    u_grid: Sequence[float],
    M: int = DEFAULT_DRAWS,
    seed: int = 0,
    mode: ThresholdMode = ThresholdMode.MONTE_CARLO,
) -> List[float]:
    return [limit_power(kind, u, epsilon, M, seed, mode) for u in _check_grid(u_grid)]
