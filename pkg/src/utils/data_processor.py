# src/utils/data_processor.py

import json
import os
from collections.abc import Sequence
from dataclasses import asdict
from typing import Any

import numpy as np
import pandas as pd

from ..utils.logger import console_logger, logger

FLOAT_FORMAT = "%.17g"
TRACE_COLUMNS = ["iteration", "cost_expected", "cost_actual", "objective"]
SUMMARY_COLUMNS = ["cost", "mean_objective", "stderr_objective", "replicates"]
LEVEL_COLUMNS = ["level", "mean_dpsi_sq", "se_dpsi_sq", "mean_psi_sq", "se_psi_sq",
                 "mean_dpsi_norm", "mean_cost", "reps"]
VARIANCE_COLUMNS = ["M", "est1_var", "est1_se", "est2_var", "est2_se", "est3_var", "est3_se", "ordering_pass"]

def write_csv(frame: pd.DataFrame, path: str) -> str:
    """
    Write a frame as comma-separated UTF-8 with LF line endings, no index,
    and floats at 17 significant digits so they read back exactly.

    Args:
        frame (pd.DataFrame): Data to write.
        path (str): Destination; parent directories are created.

    Returns:
        str: The path written.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n",
                 encoding="utf-8", na_rep="nan")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path

def write_json(data: dict[str, Any], path: str) -> str:
    """Write a JSON sidecar with sorted keys, so reruns are byte-identical."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as file:
        json.dump(data, file, indent=2, sort_keys=True, default=_json_default)
        file.write("\n")
    return path

def _json_default(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")

def trace_to_frame(trace) -> pd.DataFrame:
    """
    One row per objective evaluation of a RunTrace.

    Args:
        trace (RunTrace): The optimizer history.

    Returns:
        pd.DataFrame: Columns iteration, cost_expected, cost_actual, objective.
    """
    frame = pd.DataFrame(
        [(row.iteration, row.cost_expected, row.cost_actual, row.objective) for row in trace.rows],
        columns=TRACE_COLUMNS,
    )
    return frame.astype({"iteration": "int64", "cost_expected": "float64",
                         "cost_actual": "int64", "objective": "float64"})

def summarize_replicates(traces: dict[int, Any]) -> tuple[pd.DataFrame, list[int]] | None:
    """
    Average replicate traces on their shared evaluation grid.

    Replicates of one estimator share the iteration grid, because T and the
    evaluation cadence depend only on the config. Failed replicates (None)
    are excluded and reported.

    Args:
        traces (dict[int, RunTrace | None]): Replicate index to trace, None for a failed run.

    Returns:
        tuple[pd.DataFrame, list[int]] | None:
            1. Summary with columns cost, mean_objective, stderr_objective, replicates.
            2. Indices of the failed replicates.
            Returns None if no replicate succeeded.
    """
    if not traces:
        console_logger.error("No replicate traces provided for summarizing")
        return None

    succeeded = {r: t for r, t in sorted(traces.items()) if t is not None}
    failed = sorted(r for r, t in traces.items() if t is None)
    if not succeeded:
        console_logger.error("Every replicate failed; no summary produced")
        return None

    grids = {tuple(row.iteration for row in t.rows) for t in succeeded.values()}
    if len(grids) != 1:
        raise ValueError("Replicate traces do not share an evaluation grid")

    first = next(iter(succeeded.values()))
    objectives = np.array([[row.objective for row in t.rows] for t in succeeded.values()])
    count = objectives.shape[0]
    stderr = objectives.std(axis=0, ddof=1) / np.sqrt(count) if count > 1 else np.full(objectives.shape[1], np.nan)
    summary = pd.DataFrame({
        "cost": [row.cost_expected for row in first.rows],
        "mean_objective": objectives.mean(axis=0),
        "stderr_objective": stderr,
        "replicates": count,
    }, columns=SUMMARY_COLUMNS)

    console_logger.info(f"Summarized {count} replicates over {len(summary)} evaluation points")
    if failed:
        console_logger.warning(f"Excluded {len(failed)} failed replicates: {', '.join(map(str, failed))}")
    return summary, failed

def level_moments_frame(rows: Sequence[Any]) -> pd.DataFrame:
    """LevelMoment rows as a frame, in level order."""
    return pd.DataFrame([asdict(row) for row in rows], columns=LEVEL_COLUMNS)

def variance_frame(reports: Sequence[Any]) -> pd.DataFrame:
    """One row per VarianceReport; ordering_pass is written as 0/1."""
    frame = pd.DataFrame([{column: getattr(report, column) for column in VARIANCE_COLUMNS} for report in reports],
                         columns=VARIANCE_COLUMNS)
    return frame.astype({"M": "int64", "ordering_pass": "int64"})

def coordinate_variance_frame(reports: Sequence[Any]) -> pd.DataFrame:
    """Per-coordinate variances in long form: M, estimator, coordinate, variance."""
    records = []
    for report in reports:
        for estimator, values in ((1, report.est1_coord_var), (2, report.est2_coord_var), (3, report.est3_coord_var)):
            records.extend((report.M, estimator, j, float(v)) for j, v in enumerate(values))
    return pd.DataFrame(records, columns=["M", "estimator", "coordinate", "variance"])
