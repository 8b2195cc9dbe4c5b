"""
Command-line interface for poisson-tests.

Usage:
    python -m poisson_tests fisher --model paper --n 100
    python -m poisson_tests simulate --model paper --n 5 --u 2 --seed 42 --output ./output
    python -m poisson_tests thresholds --test BT1 --epsilon 0.05 --M 100000
    python -m poisson_tests power --test SFT --test BT1 --n 800 --N 10000 --jobs 4
    python -m poisson_tests reproduce table1 --M 1000000 --seed 7
    python -m poisson_tests reproduce fig2 --n 10 --u-stop 30 --u-count 16
"""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import pandas as pd
import typer
from pydantic import ValidationError

from .config import OUTPUT_ENVVAR, PriorKind, RunConfig, load_config
from .errors import ConfigError, DomainError, NumericError
from .hypothesis_tests import neyman_pearson_level, threshold_for
from .intensity import local_scale
from .likelihood import score_drift
from .models import PowerCurve, TestKind, ThresholdMode, ThresholdRow
from .power import limit_curve, power_curves
from .simulation import sample_experiment
from .storage import (
    write_experiment,
    write_limit_curves,
    write_power_curves,
    write_score_drift,
    write_thresholds,
)

logger = logging.getLogger(__name__)

TABLE1_EPSILONS = [0.01, 0.05, 0.10, 0.2, 0.4, 0.5]

app = typer.Typer(
    name="poisson-tests",
    help="Asymptotic tests for the parameter of an inhomogeneous Poisson intensity",
    add_completion=False,
)
reproduce_app = typer.Typer(help="Regenerate the threshold table and the power figures")
app.add_typer(reproduce_app, name="reproduce")


# ==================== Shared Options ====================


def _config_option():
    return typer.Option(
        None, "--config", "-c",
        help="JSON run configuration; flags override its values",
        exists=True, dir_okay=False,
    )


def _verbose_option():
    return typer.Option(0, "--verbose", "-v", count=True, help="Log progress (-vv for debug)")


def _output_option():
    return typer.Option(
        None, "--output", "-o",
        envvar=OUTPUT_ENVVAR,
        help="Output directory for CSV files",
    )


def _seed_option():
    return typer.Option(None, "--seed", "-s", help="Root seed (64-bit unsigned)")


def _model_option():
    return typer.Option(None, "--model", "-m", help="Registered model name")


def _table_option():
    return typer.Option(
        None, "--table",
        help="Intensity table CSV (theta,t,lambda) used instead of a registered model",
        exists=True, dir_okay=False,
    )


def _configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True
    )


def _setup(
    verbose: int,
    config_path: Optional[Path],
    prior: Optional[Dict] = None,
    **overrides,
) -> RunConfig:
    """Configure logging and merge the config file with command-line flags."""
    _configure_logging(verbose)
    config = load_config(config_path)
    if prior:
        base = config.prior.model_dump()
        if "kind" in prior:
            if prior["kind"] is not PriorKind.TABLE:
                base.pop("path")
        elif "path" in prior:
            base.pop("kind")
        overrides["prior"] = {**base, **prior}
    return config.with_overrides(**overrides)


def _fail(message: str, code: int) -> None:
    typer.echo(typer.style(f"ERROR: {message}", fg=typer.colors.RED), err=True)
    raise typer.Exit(code)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Exit 2 on configuration or domain errors, 3 on numeric failures."""
    try:
        yield
    except (ConfigError, DomainError, ValidationError) as e:
        _fail(str(e), 2)
    except NumericError as e:
        _fail(str(e), 3)


# ==================== Commands ====================


@app.command()
def fisher(
    config: Optional[Path] = _config_option(),
    model: Optional[str] = _model_option(),
    table: Optional[Path] = _table_option(),
    theta1: Optional[float] = typer.Option(None, "--theta1", help="Override the null value"),
    n: Optional[int] = typer.Option(None, "--n", help="Number of paths"),
    verbose: int = _verbose_option(),
):
    """
    Print the Fisher information, local scale and u range of a model.
    """
    with _exit_codes():
        cfg = _setup(verbose, config, model=model, intensity_table=table, theta1=theta1, n=n)
        resolved = cfg.resolve_model()
        scale = local_scale(resolved, cfg.n)

    typer.echo(f"Model: {resolved.name}")
    typer.echo(f"  theta1={scale.theta1:g}, b={resolved.b:g}, tau={resolved.tau:g}")
    typer.echo(f"  Fisher information I(theta1): {scale.fisher:.6f}")
    typer.echo(f"  phi_n (n={scale.n}): {scale.phi_n:.6g}")
    typer.echo(f"  u_max: {scale.u_max:.6g}")


@app.command()
def simulate(
    config: Optional[Path] = _config_option(),
    model: Optional[str] = _model_option(),
    table: Optional[Path] = _table_option(),
    theta1: Optional[float] = typer.Option(None, "--theta1", help="Override the null value"),
    n: Optional[int] = typer.Option(None, "--n", help="Number of paths"),
    u: Optional[float] = typer.Option(None, "--u", help="Local alternative theta1 + u*phi_n"),
    theta: Optional[float] = typer.Option(None, "--theta", help="Generating parameter"),
    seed: Optional[int] = _seed_option(),
    output: Optional[Path] = _output_option(),
    name: str = typer.Option("experiment", "--name", help="File stem of the experiment CSV"),
    verbose: int = _verbose_option(),
):
    """
    Simulate an n-path experiment and write it as CSV plus a JSON sidecar.

    The generating parameter is given either directly (--theta) or as a
    local alternative (--u, default 0).
    """
    with _exit_codes():
        cfg = _setup(
            verbose, config,
            model=model, intensity_table=table, theta1=theta1, n=n, seed=seed, output_dir=output,
        )
        if u is not None and theta is not None:
            raise ConfigError("give either --u or --theta, not both")
        resolved = cfg.resolve_model()
        if theta is None:
            scale = local_scale(resolved, cfg.n)
            u = 0.0 if u is None else u
            if not 0.0 <= u < scale.u_max:
                raise DomainError(f"u={u} outside [0, {scale.u_max:g}) for n={cfg.n}")
            theta = scale.theta_at(u)
        experiment = sample_experiment(resolved, theta, cfg.n, cfg.seed)
        path = write_experiment(experiment, cfg.output_dir / f"{name}.csv")

    typer.echo(
        f"Simulated {experiment.n} paths at theta={theta:.6g}: {experiment.total_events} events"
    )
    typer.echo(f"  {path}")


def _threshold_rows(cfg: RunConfig) -> List[ThresholdRow]:
    rows = []
    for kind in cfg.tests:
        drawn = kind.is_bayes and cfg.threshold_mode is ThresholdMode.MONTE_CARLO
        for eps in cfg.epsilons:
            rows.append(
                ThresholdRow(
                    test=kind,
                    epsilon=eps,
                    threshold=threshold_for(kind, eps, cfg.M, cfg.seed, cfg.threshold_mode),
                    M=cfg.M if drawn else 0,
                    seed=cfg.seed,
                )
            )
    return rows


def _echo_thresholds(rows: Sequence[ThresholdRow]) -> None:
    for row in rows:
        typer.echo(f"  {row.test.value:<5} epsilon={row.epsilon:<6g} {row.threshold:.6f}")


@app.command()
def thresholds(
    config: Optional[Path] = _config_option(),
    test: Optional[List[TestKind]] = typer.Option(None, "--test", "-t", help="Test (repeatable)"),
    epsilon: Optional[List[float]] = typer.Option(
        None, "--epsilon", "-e", help="Nominal size (repeatable)"
    ),
    draws: Optional[int] = typer.Option(None, "--M", "--draws", help="Normal draws for BT1/BT2"),
    seed: Optional[int] = _seed_option(),
    closed_form: Optional[bool] = typer.Option(
        None, "--closed-form/--monte-carlo", help="Closed-form BT1/BT2 thresholds"
    ),
    model: Optional[str] = _model_option(),
    theta1: Optional[float] = typer.Option(None, "--theta1", help="Override the null value"),
    n: Optional[int] = typer.Option(None, "--n", help="Paths, for the BT2 likelihood level"),
    output: Optional[Path] = _output_option(),
    verbose: int = _verbose_option(),
):
    """
    Compute critical values and write thresholds.csv.

    With --model or --n, BT2 also reports the equivalent level on the
    prior-averaged likelihood ratio.
    """
    with _exit_codes():
        cfg = _setup(
            verbose, config,
            tests=test or None, epsilons=epsilon or None, M=draws, seed=seed,
            closed_form=closed_form, model=model, theta1=theta1, n=n, output_dir=output,
        )
        rows = _threshold_rows(cfg)
        path = write_thresholds(rows, cfg.output_dir / "thresholds.csv")
        levels = []
        if TestKind.BT2 in cfg.tests and (model is not None or n is not None):
            resolved = cfg.resolve_model()
            prior = cfg.prior.build(resolved)
            scale = local_scale(resolved, cfg.n)
            levels = [
                (row.epsilon, neyman_pearson_level(row.threshold, prior, resolved, scale))
                for row in rows
                if row.test is TestKind.BT2
            ]

    typer.echo(f"Thresholds ({cfg.threshold_mode.value}, M={cfg.M}, seed={cfg.seed}):")
    _echo_thresholds(rows)
    for eps, level in levels:
        typer.echo(f"  BT2 likelihood level at epsilon={eps:g}, n={cfg.n}: {level:.6g}")
    typer.echo(f"Wrote {path}")


# ==================== Power Runs ====================


def _run_power(
    cfg: RunConfig, stem: str, limit: bool, drift: bool
) -> Tuple[List[PowerCurve], List[Path]]:
    model = cfg.resolve_model()
    prior = cfg.resolve_prior(model)
    grid = cfg.u_grid()
    options = cfg.test_options()

    curves: List[PowerCurve] = []
    for eps in cfg.epsilons:
        by_kind = power_curves(cfg.tests, model, prior, eps, grid, cfg.n, cfg.N, cfg.seed, options)
        curves.extend(by_kind.values())
    written = [write_power_curves(curves, cfg.output_dir / f"{stem}power.csv")]

    if limit:
        rows = []
        for eps in cfg.epsilons:
            for kind in cfg.tests:
                betas = limit_curve(kind, eps, grid, cfg.M, cfg.seed, cfg.threshold_mode)
                rows.extend(
                    {"test": kind.value, "epsilon": eps, "u": u, "beta_limit": beta}
                    for u, beta in zip(grid, betas)
                )
        written.append(write_limit_curves(rows, cfg.output_dir / f"{stem}limit.csv"))

    if drift:
        scale = local_scale(model, cfg.n)
        rows = [{"n": cfg.n, "u": u, "drift": score_drift(model, scale, u)} for u in grid]
        written.append(write_score_drift(rows, cfg.output_dir / f"{stem}score_drift.csv"))
    return curves, written


def _echo_curves(curves: Sequence[PowerCurve], written: Sequence[Path]) -> None:
    rows = [row for curve in curves for row in curve.to_csv_rows()]
    table = pd.DataFrame(rows).pivot_table(
        index=["epsilon", "u"], columns="test", values="beta_hat", sort=False
    )
    typer.echo(table.to_string(float_format=lambda x: f"{x:.4f}"))
    for path in written:
        typer.echo(f"Wrote {path}")


def _power_overrides(**flags) -> Dict:
    return {k: v for k, v in flags.items() if v is not None and v != []}


@app.command()
def power(
    config: Optional[Path] = _config_option(),
    test: Optional[List[TestKind]] = typer.Option(None, "--test", "-t", help="Test (repeatable)"),
    epsilon: Optional[List[float]] = typer.Option(
        None, "--epsilon", "-e", help="Nominal size (repeatable)"
    ),
    model: Optional[str] = _model_option(),
    table: Optional[Path] = _table_option(),
    theta1: Optional[float] = typer.Option(None, "--theta1", help="Override the null value"),
    n: Optional[int] = typer.Option(None, "--n", help="Paths per experiment"),
    replicates: Optional[int] = typer.Option(None, "--N", "--replicates", help="Replicates per u"),
    draws: Optional[int] = typer.Option(None, "--M", "--draws", help="Normal draws for BT1/BT2"),
    u_start: Optional[float] = typer.Option(None, "--u-start", help="First local alternative"),
    u_stop: Optional[float] = typer.Option(None, "--u-stop", help="Last local alternative"),
    u_count: Optional[int] = typer.Option(None, "--u-count", help="Number of u values"),
    seed: Optional[int] = _seed_option(),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes"),
    prior: Optional[PriorKind] = typer.Option(None, "--prior", help="Prior family for BT1/BT2"),
    prior_lower: Optional[float] = typer.Option(None, "--prior-lower", help="Prior support start"),
    prior_upper: Optional[float] = typer.Option(None, "--prior-upper", help="Prior support end"),
    prior_mode: Optional[float] = typer.Option(None, "--prior-mode", help="Triangular prior peak"),
    prior_table: Optional[Path] = typer.Option(
        None, "--prior-table", help="Prior CSV (theta,density)", exists=True, dir_okay=False
    ),
    closed_form: Optional[bool] = typer.Option(
        None, "--closed-form/--monte-carlo", help="Closed-form BT1/BT2 thresholds"
    ),
    limit: bool = typer.Option(True, "--limit/--no-limit", help="Also write limit.csv"),
    drift: bool = typer.Option(False, "--drift", help="Also write score_drift.csv"),
    output: Optional[Path] = _output_option(),
    verbose: int = _verbose_option(),
):
    """
    Estimate power curves over a u grid and write power.csv.

    Every test sees the same replicate experiments; the output does not
    depend on --jobs.
    """
    with _exit_codes():
        cfg = _setup(
            verbose, config,
            prior=_power_overrides(
                kind=prior, lower=prior_lower, upper=prior_upper, mode=prior_mode, path=prior_table
            ),
            tests=test or None, epsilons=epsilon or None, model=model, intensity_table=table,
            theta1=theta1, n=n, N=replicates, M=draws, u_start=u_start, u_stop=u_stop,
            u_count=u_count, seed=seed, jobs=jobs, closed_form=closed_form, output_dir=output,
        )
        curves, written = _run_power(cfg, "", limit, drift)
    _echo_curves(curves, written)


# ==================== Reproduction Presets ====================


@reproduce_app.command("table1")
def reproduce_table1(
    draws: int = typer.Option(100_000, "--M", "--draws", help="Normal draws"),
    seed: int = typer.Option(0, "--seed", "-s", help="Root seed"),
    output: Optional[Path] = _output_option(),
    verbose: int = _verbose_option(),
):
    """
    BT1 thresholds at epsilon = 0.01, 0.05, 0.10, 0.2, 0.4, 0.5 (table1.csv).
    """
    with _exit_codes():
        cfg = _setup(
            verbose, None,
            tests=[TestKind.BT1], epsilons=TABLE1_EPSILONS, M=draws, seed=seed, output_dir=output,
        )
        rows = _threshold_rows(cfg)
        path = write_thresholds(rows, cfg.output_dir / "table1.csv")

    typer.echo(f"BT1 thresholds (M={cfg.M}, seed={cfg.seed}):")
    _echo_thresholds(rows)
    typer.echo(f"Wrote {path}")


def _reproduce_figure(
    stem: str,
    kinds: List[TestKind],
    config: Optional[Path],
    verbose: int,
    **overrides,
) -> None:
    with _exit_codes():
        cfg = _setup(verbose, config, model="paper", tests=kinds, **overrides)
        curves, written = _run_power(cfg, stem, limit=True, drift=True)
    _echo_curves(curves, written)


@reproduce_app.command("fig1")
def reproduce_fig1(
    config: Optional[Path] = _config_option(),
    n: Optional[int] = typer.Option(None, "--n", help="Paths per experiment"),
    replicates: Optional[int] = typer.Option(None, "--N", "--replicates", help="Replicates per u"),
    draws: Optional[int] = typer.Option(None, "--M", "--draws", help="Normal draws for BT1"),
    epsilon: Optional[List[float]] = typer.Option(None, "--epsilon", "-e", help="Nominal size"),
    u_start: Optional[float] = typer.Option(None, "--u-start", help="First local alternative"),
    u_stop: Optional[float] = typer.Option(None, "--u-stop", help="Last local alternative"),
    u_count: Optional[int] = typer.Option(None, "--u-count", help="Number of u values"),
    seed: Optional[int] = _seed_option(),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes"),
    output: Optional[Path] = _output_option(),
    verbose: int = _verbose_option(),
):
    """
    SFT and BT1 power curves on the paper model with their limits (fig1_*.csv).
    """
    _reproduce_figure(
        "fig1_", [TestKind.SFT, TestKind.BT1], config, verbose,
        n=n, N=replicates, M=draws, epsilons=epsilon or None, u_start=u_start, u_stop=u_stop,
        u_count=u_count, seed=seed, jobs=jobs, output_dir=output,
    )


@reproduce_app.command("fig2")
def reproduce_fig2(
    config: Optional[Path] = _config_option(),
    n: Optional[int] = typer.Option(None, "--n", help="Paths per experiment"),
    replicates: Optional[int] = typer.Option(None, "--N", "--replicates", help="Replicates per u"),
    epsilon: Optional[List[float]] = typer.Option(None, "--epsilon", "-e", help="Nominal size"),
    u_start: Optional[float] = typer.Option(None, "--u-start", help="First local alternative"),
    u_stop: Optional[float] = typer.Option(None, "--u-stop", help="Last local alternative"),
    u_count: Optional[int] = typer.Option(None, "--u-count", help="Number of u values"),
    seed: Optional[int] = _seed_option(),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes"),
    output: Optional[Path] = _output_option(),
    verbose: int = _verbose_option(),
):
    """
    GLRT and Wald power curves on the paper model with their limit (fig2_*.csv).

    The SFT curve is estimated on the same replicates for comparison.
    """
    _reproduce_figure(
        "fig2_", [TestKind.GLRT, TestKind.WALD, TestKind.SFT], config, verbose,
        n=n, N=replicates, epsilons=epsilon or None, u_start=u_start, u_stop=u_stop,
        u_count=u_count, seed=seed, jobs=jobs, output_dir=output,
    )


def main():
    """Entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
