# src/experiments/commands.py

import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..diagnostics.decay import DecayFit, LevelMoment, decay_fit_from_rows, level_moments
from ..diagnostics.gradcheck import GradCheckReport, grad_check
from ..diagnostics.objectives import iv_noise_floor, objective_for, objective_iv
from ..diagnostics.variance import VarianceReport, variance_compare
from ..optim.robbins_monro import RunTrace, budget_accounting, robbins_monro
from ..problems.base import CsoProblem, SquaredLossProblem
from ..problems.iv import IvProblem
from ..rng.streams import StreamKey, StreamRole, derive
from ..utils.config_loader import RunConfig
from ..utils.data_processor import (
    coordinate_variance_frame,
    level_moments_frame,
    summarize_replicates,
    trace_to_frame,
    variance_frame,
    write_csv,
    write_json,
)
from ..utils.exceptions import CannotFitError, ConfigError, DivergenceError, LevelOverflowError, MissingArtifactError
from ..utils.logger import console_logger, logger
from .builders import build_estimator, build_problem, build_schedule, estimator_label, initial_point

GRID_LOW = -3.0
GRID_HIGH = 3.0

@dataclass
class OptimizeResult:
    """Outcome of one estimator's replicates in cmd_optimize."""
    label: str
    directory: str
    traces: dict[int, RunTrace | None]
    failures: dict[int, str] = field(default_factory=dict)
    summary: pd.DataFrame | None = None

    @property
    def succeeded(self) -> int:
        return sum(trace is not None for trace in self.traces.values())

def _parallel_map(config: RunConfig, fn: Callable, items: Iterable) -> list:
    # streams are keyed by item, so results do not depend on the thread count
    items = list(items)
    if config.run.threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=config.run.threads) as pool:
        return list(pool.map(fn, items))

def _command_dir(config: RunConfig, name: str) -> str:
    directory = os.path.join(config.output.dir, name)
    os.makedirs(directory, exist_ok=True)
    return directory

def _write_run_config(config: RunConfig, directory: str) -> None:
    write_json({"config": config.to_dict(), "seed": config.run.seed}, os.path.join(directory, "run_config.json"))

def load_params(path: str | None, problem: CsoProblem) -> np.ndarray:
    """
    Load a parameter vector saved by cmd_optimize.

    Raises:
        MissingArtifactError: If no path is configured or the file does not exist.
        DimensionMismatchError: If the vector does not fit the problem.
    """
    if path is None:
        raise MissingArtifactError("diagnostics.params_file is not set; run optimize first")
    if not os.path.isfile(path):
        raise MissingArtifactError(f"Trained parameter file not found: {path}")
    return problem.check_param(np.load(path))

def _evaluation_point(problem: CsoProblem, config: RunConfig) -> np.ndarray:
    if config.diagnostics.params_file is not None:
        return load_params(config.diagnostics.params_file, problem)
    return initial_point(problem, config.problem, 0)

def cmd_beta(config: RunConfig) -> tuple[list[LevelMoment], DecayFit | None]:
    """
    Level-moment decay: E||Delta psi_l||^2 and E||psi_l||^2 per level, then the beta fit.

    Writes beta/level_moments.csv and beta/beta_fit.json. A fit that cannot be
    made (e.g. all moments zero for an affine f) is reported in the sidecar
    instead of failing the command.
    """
    problem = build_problem(config.problem)
    x = _evaluation_point(problem, config)
    diagnostics = config.diagnostics
    first, last = diagnostics.levels
    console_logger.info(f"Estimating level moments for levels {first}..{last} with {diagnostics.reps} reps")

    def run_level(level: int) -> LevelMoment:
        rng = derive(StreamKey(config.run.seed, (0, StreamRole.DIAGNOSTIC, level)))
        return level_moments(problem, x, [level], diagnostics.reps, rng)[0]

    rows = _parallel_map(config, run_level, range(first, last + 1))
    directory = _command_dir(config, "beta")
    write_csv(level_moments_frame(rows), os.path.join(directory, "level_moments.csv"))

    fit = None
    try:
        fit = decay_fit_from_rows(rows, diagnostics.fit_range)
        sidecar = {"beta": fit.beta, "intercept": fit.intercept, "c2": fit.c2, "fit_range": list(fit.fit_range)}
        console_logger.info(f"Fitted beta = {fit.beta:.4f}")
    except CannotFitError as e:
        console_logger.warning(f"Cannot fit beta: {e}")
        sidecar = {"beta": None, "intercept": None, "c2": None,
                   "fit_range": list(diagnostics.fit_range), "reason": str(e)}
    write_json(sidecar, os.path.join(directory, "beta_fit.json"))
    _write_run_config(config, directory)
    return rows, fit

def cmd_optimize(config: RunConfig) -> list[OptimizeResult]:
    """
    Robbins-Monro runs for every configured estimator and replicate.

    Each estimator gets a subdirectory of optimize/ holding replicate_<r>.csv,
    final_params_<r>.npy, summary.csv and summary.json. A diverging replicate
    is logged and recorded in summary.json; the remaining replicates continue.
    Replicate r starts every estimator from the same point and evaluates the
    objective on the same streams.
    """
    problem = build_problem(config.problem)
    schedule = build_schedule(config.sgd)
    diagnostics = config.diagnostics
    objective = objective_for(problem, diagnostics.objective_n_hat, diagnostics.objective_n, diagnostics.objective_m)
    root = _command_dir(config, "optimize")
    _write_run_config(config, root)

    results = []
    for index, settings in enumerate(config.estimators):
        estimator = build_estimator(settings)
        label = estimator_label(settings)
        directory = _command_dir(config, os.path.join("optimize", label))
        console_logger.info(f"Optimizing with {label}: {config.run.replicates} replicates, budget {config.sgd.budget:g}")

        def run_replicate(replicate: int) -> tuple[int, RunTrace | None, str | None]:
            x0 = initial_point(problem, config.problem, replicate)
            rng = derive(StreamKey(config.run.seed, (replicate, StreamRole.GRADIENT, index)))
            try:
                trace = robbins_monro(
                    problem, estimator, x0, schedule, config.sgd.budget, config.sgd.eval_every, rng,
                    objective=objective,
                    objective_key=StreamKey(config.run.seed, (replicate, StreamRole.OBJECTIVE)),
                    snapshot_params=config.sgd.snapshot_params,
                )
            except (DivergenceError, LevelOverflowError) as e:
                console_logger.error(f"{label} replicate {replicate} failed: {e}")
                logger.exception(f"Detailed error for {label} replicate {replicate}:")
                return replicate, None, str(e)
            write_csv(trace_to_frame(trace), os.path.join(directory, f"replicate_{replicate:03d}.csv"))
            np.save(os.path.join(directory, f"final_params_{replicate:03d}.npy"), trace.final_params)
            if config.sgd.snapshot_params:
                np.save(os.path.join(directory, f"snapshots_{replicate:03d}.npy"),
                        np.stack([row.params for row in trace.rows]))
            return replicate, trace, None

        outcomes = _parallel_map(config, run_replicate, range(config.run.replicates))
        result = OptimizeResult(label, directory,
                                traces={r: trace for r, trace, _ in outcomes},
                                failures={r: message for r, _, message in outcomes if message})
        summarized = summarize_replicates(result.traces)
        if summarized is not None:
            result.summary, _ = summarized
            write_csv(result.summary, os.path.join(directory, "summary.csv"))
        write_json({
            "label": label,
            "estimator": estimator.to_dict(),
            "cost_per_iteration": budget_accounting(estimator),
            "succeeded": result.succeeded,
            "failed": {str(r): message for r, message in result.failures.items()},
            "mean_step_cost": {str(r): trace.mean_step_cost for r, trace in result.traces.items() if trace is not None},
        }, os.path.join(directory, "summary.json"))
        results.append(result)
    return results

def cmd_compare_variance(config: RunConfig) -> list[VarianceReport]:
    """
    Variances of squared-loss estimators 1(M), 2(M), 3(2M) for each configured M.

    Writes compare_variance/variance.csv and coordinate_variances.csv.

    Raises:
        ConfigError: If the problem is not a squared-loss problem.
    """
    problem = build_problem(config.problem)
    if not isinstance(problem, SquaredLossProblem):
        raise ConfigError(f"compare-variance needs a squared-loss problem, got {config.problem.kind!r}", "problem.kind")
    x = _evaluation_point(problem, config)
    reps = config.diagnostics.variance_reps

    def run(M: int) -> VarianceReport:
        return variance_compare(problem, x, M, reps, derive(StreamKey(config.run.seed, (0, StreamRole.DIAGNOSTIC, M))))

    reports = _parallel_map(config, run, config.diagnostics.M_values)
    directory = _command_dir(config, "compare_variance")
    write_csv(variance_frame(reports), os.path.join(directory, "variance.csv"))
    write_csv(coordinate_variance_frame(reports), os.path.join(directory, "coordinate_variances.csv"))
    _write_run_config(config, directory)
    failed = [report.M for report in reports if not report.ordering_pass]
    if failed:
        console_logger.warning(f"Variance ordering violated beyond tolerance for M = {failed}")
    return reports

def _random_point(problem: CsoProblem, config: RunConfig, point: int, model_index: int) -> np.ndarray:
    rng = derive(StreamKey(config.problem.init_seed, (point, StreamRole.INIT, model_index)))
    if isinstance(problem, IvProblem):
        return problem.net.init_params(rng)
    return rng.normal(0.0, 1.0, size=problem.dim)

def cmd_gradcheck(config: RunConfig) -> dict[str, GradCheckReport]:
    """
    Finite-difference checks of every selected model at n_points random parameter vectors.

    Writes gradcheck/gradcheck.json; the caller turns a failure into a nonzero exit.
    """
    diagnostics = config.diagnostics
    reports = {}
    for model_index, model in enumerate(diagnostics.models):
        problem = build_problem(config.problem, kind=model)

        def check(point: int) -> GradCheckReport:
            x = _random_point(problem, config, point, model_index)
            rng = derive(StreamKey(config.run.seed, (point, StreamRole.DIAGNOSTIC, model_index)))
            return grad_check(problem, x, diagnostics.step, diagnostics.tol, rng)

        point_reports = _parallel_map(config, check, range(diagnostics.n_points))
        worst = max(point_reports, key=lambda r: r.max_rel_err)
        reports[model] = GradCheckReport(
            passed=all(r.passed for r in point_reports),
            max_rel_err=worst.max_rel_err,
            worst=worst.worst,
            step=diagnostics.step,
            tol=diagnostics.tol,
            n_points=diagnostics.n_points,
        )
        status = "pass" if reports[model].passed else "FAIL"
        console_logger.info(f"gradcheck {model}: max rel err {worst.max_rel_err:.3e} ({status})")

    directory = _command_dir(config, "gradcheck")
    write_json({
        "passed": all(r.passed for r in reports.values()),
        "models": {name: report.to_dict() for name, report in reports.items()},
    }, os.path.join(directory, "gradcheck.json"))
    _write_run_config(config, directory)
    return reports

def cmd_iv_fit(config: RunConfig) -> tuple[pd.DataFrame, pd.DataFrame]:
    """
    Evaluate a trained IV network on a grid over [-3, 3] and emit a data scatter.

    Writes iv_fit/curve.csv (x, truth_f, fitted_g), iv_fit/scatter.csv (X, Y)
    and iv_fit/fit.json with the objective estimate against the noise floor.

    Raises:
        ConfigError: If the problem is not iv.
        MissingArtifactError: If the trained parameter file is missing.
    """
    if config.problem.kind != "iv":
        raise ConfigError(f"iv-fit needs problem.kind = iv, got {config.problem.kind!r}", "problem.kind")
    problem = build_problem(config.problem)
    params = load_params(config.diagnostics.params_file, problem)
    process = problem.process

    grid = np.linspace(GRID_LOW, GRID_HIGH, config.diagnostics.grid_points)
    curve = pd.DataFrame({"x": grid, "truth_f": process.truth(grid), "fitted_g": problem.net.forward(params, grid)})
    data = process.sample_many(derive(StreamKey(config.run.seed, (0, StreamRole.DATA))), config.diagnostics.scatter_rows)
    scatter = pd.DataFrame({"X": data["X"], "Y": data["Y"]})

    objective = objective_iv(problem, params, config.diagnostics.objective_n, config.diagnostics.objective_m,
                             derive(StreamKey(config.run.seed, (0, StreamRole.OBJECTIVE))))
    floor = iv_noise_floor(process)
    console_logger.info(f"IV fit objective {objective:.6g} against noise floor {floor:.6g}")

    directory = _command_dir(config, "iv_fit")
    write_csv(curve, os.path.join(directory, "curve.csv"))
    write_csv(scatter, os.path.join(directory, "scatter.csv"))
    write_json({"objective": objective, "noise_floor": floor, "ratio": objective / floor if floor > 0 else None,
                "params_file": config.diagnostics.params_file}, os.path.join(directory, "fit.json"))
    _write_run_config(config, directory)
    return curve, scatter
