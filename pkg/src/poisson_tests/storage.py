"""
CSV readers and writers for experiments, thresholds, power curves and tables.

Every file is comma-separated UTF-8 with Unix newlines and a fixed header.
An experiment is stored as a long CSV (path_index, event_time) plus a JSON
sidecar carrying model, θ, n, seed and τ, so paths without events survive
a round trip.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from .errors import ConfigError
from .intensity import TableModel, audit_model
from .models import (
    Experiment,
    ExperimentMetadata,
    PathSample,
    PowerCurve,
    ThresholdRow,
)
from .priors import TabulatedPrior

logger = logging.getLogger(__name__)

# ==================== Column Layouts ====================

EXPERIMENT_COLUMNS = ["path_index", "event_time"]
THRESHOLD_COLUMNS = ["test", "epsilon", "threshold", "M", "seed"]
POWER_COLUMNS = ["test", "epsilon", "n", "N", "u", "beta_hat", "ci_lo", "ci_hi", "seed"]
LIMIT_COLUMNS = ["test", "epsilon", "u", "beta_limit"]
DRIFT_COLUMNS = ["n", "u", "drift"]
MODEL_TABLE_COLUMNS = ["theta", "t", "lambda"]
PRIOR_TABLE_COLUMNS = ["theta", "density"]


def sidecar_path(csv_path: Path) -> Path:
    """JSON metadata file stored next to an experiment CSV."""
    return Path(csv_path).with_suffix(".json")


def _write_csv(rows: Iterable[Dict], columns: Sequence[str], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(list(rows), columns=list(columns))
    df.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    logger.info("wrote %s (%d rows)", path, len(df))
    return path


def _read_csv(path: Path, columns: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: file not found")
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ConfigError(f"{path}: could not parse CSV: {e}") from e
    if list(df.columns) != list(columns):
        raise ConfigError(
            f"{path}: expected header {','.join(columns)}, got {','.join(map(str, df.columns))}"
        )
    if df.isna().any().any():
        raise ConfigError(f"{path}: empty cells")
    return df


# ==================== Experiments ====================


def write_experiment(experiment: Experiment, path: Path) -> Path:
    """
    Write an experiment CSV and its JSON sidecar.

    Args:
        experiment: Experiment to store
        path: Target CSV path; the sidecar gets the same stem with .json

    Returns:
        Path of the CSV file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    experiment.to_frame().to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    with open(sidecar_path(path), "w", encoding="utf-8", newline="\n") as f:
        f.write(experiment.metadata().model_dump_json(indent=2))
        f.write("\n")
    logger.info("wrote %s (%d paths, %d events)", path, experiment.n, experiment.total_events)
    return path


def load_experiment_metadata(path: Path) -> ExperimentMetadata:
    """
    Load the sidecar of an experiment CSV.

    Raises:
        ConfigError: If the sidecar is missing or malformed
    """
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise ConfigError(f"{meta_path}: sidecar metadata not found")
    try:
        with open(meta_path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return ExperimentMetadata.model_validate(data)
    except (json.JSONDecodeError, ValidationError) as e:
        raise ConfigError(f"{meta_path}: invalid metadata: {e}") from e


def read_experiment(path: Path) -> Experiment:
    """
    Read an experiment written by write_experiment.

    Raises:
        ConfigError: If the CSV or its sidecar is malformed
    """
    meta = load_experiment_metadata(path)
    df = _read_csv(path, EXPERIMENT_COLUMNS)
    index = df["path_index"].to_numpy()
    if index.size and (index.min() < 1 or index.max() > meta.n):
        raise ConfigError(f"{path}: path_index outside 1..{meta.n}")

    times = df["event_time"].to_numpy(dtype=float)
    try:
        paths = tuple(
            PathSample(events=times[index == j]) for j in range(1, meta.n + 1)
        )
        return Experiment(
            paths=paths,
            theta_true=meta.theta,
            seed=meta.seed,
            tau=meta.tau,
            source_model=meta.model,
        )
    except ValidationError as e:
        raise ConfigError(f"{path}: invalid experiment: {e}") from e


# ==================== Result Tables ====================


def write_thresholds(rows: Sequence[ThresholdRow], path: Path) -> Path:
    """Write a ThresholdTable CSV: test,epsilon,threshold,M,seed."""
    return _write_csv([r.to_csv_row() for r in rows], THRESHOLD_COLUMNS, path)


def write_power_curves(curves: Sequence[PowerCurve], path: Path) -> Path:
    """Write power curves, one row per (test, u), in the order given."""
    rows: List[Dict] = []
    for curve in curves:
        rows.extend(curve.to_csv_rows())
    return _write_csv(rows, POWER_COLUMNS, path)


def write_limit_curves(rows: Sequence[Dict], path: Path) -> Path:
    """Write limit power rows: test,epsilon,u,beta_limit."""
    return _write_csv(rows, LIMIT_COLUMNS, path)


def write_score_drift(rows: Sequence[Dict], path: Path) -> Path:
    """Write score drift rows: n,u,drift."""
    return _write_csv(rows, DRIFT_COLUMNS, path)


# ==================== Input Tables ====================


def load_table_model(
    path: Path, name: str = "table", tau: Optional[float] = None
) -> TableModel:
    """
    Load an intensity table with header theta,t,lambda.

    Rows must be sorted by (theta, t) and cover a rectangular grid. The
    parameter interval is [first theta, last theta), the window is
    [0, last t] unless tau is given, and λ_min is the smallest tabulated value.

    Raises:
        ConfigError: If the table is malformed or fails the model audit
    """
    df = _read_csv(path, MODEL_TABLE_COLUMNS)
    thetas = np.unique(df["theta"].to_numpy(dtype=float))
    ts = np.unique(df["t"].to_numpy(dtype=float))
    if len(df) != thetas.size * ts.size:
        raise ConfigError(
            f"{path}: {len(df)} rows do not form a rectangular {thetas.size}x{ts.size} grid"
        )
    expected = pd.MultiIndex.from_product([thetas, ts])
    actual = pd.MultiIndex.from_arrays([df["theta"].to_numpy(float), df["t"].to_numpy(float)])
    if not actual.equals(expected):
        raise ConfigError(f"{path}: rows must be sorted by (theta, t) on a rectangular grid")

    values = df["lambda"].to_numpy(dtype=float).reshape(thetas.size, ts.size)
    if np.any(values <= 0):
        raise ConfigError(f"{path}: lambda must be positive")
    try:
        model = TableModel(
            name=name,
            theta1=float(thetas[0]),
            b=float(thetas[-1]),
            tau=float(ts[-1]) if tau is None else tau,
            lambda_min=float(values.min()),
            theta_grid=thetas,
            t_grid=ts,
            values=values,
        )
    except ValidationError as e:
        raise ConfigError(f"{path}: invalid intensity table: {e}") from e
    audit_model(model)
    logger.info("loaded table model '%s' (%dx%d) from %s", name, thetas.size, ts.size, path)
    return model


def load_prior_table(path: Path) -> TabulatedPrior:
    """
    Load a prior density table with header theta,density.

    Raises:
        ConfigError: If the table is malformed
    """
    df = _read_csv(path, PRIOR_TABLE_COLUMNS)
    nodes = df["theta"].to_numpy(dtype=float)
    values = df["density"].to_numpy(dtype=float)
    if nodes.size < 2:
        raise ConfigError(f"{path}: prior table needs at least two rows")
    try:
        return TabulatedPrior(
            lower=float(nodes[0]), upper=float(nodes[-1]), nodes=nodes, values=values
        )
    except ValidationError as e:
        raise ConfigError(f"{path}: invalid prior table: {e}") from e
