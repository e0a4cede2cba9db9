# src/diagnostics/decay.py

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..estimators.mlmc import draw_level_statistics
from ..problems.base import CsoProblem
from ..rng.streams import RngStream
from ..utils.exceptions import CannotFitError, InvalidArgumentError
from ..utils.general_utility import require_count
from ..utils.logger import logger

DEFAULT_FIT_RANGE = (1, 8)

@dataclass(frozen=True)
class LevelMoment:
    """
    Monte Carlo second moments of the level statistics at one level.

    Attributes:
        level (int): The level l.
        mean_dpsi_sq (float): Estimate of E||Delta psi_l||^2.
        se_dpsi_sq (float): Its standard error.
        mean_psi_sq (float): Estimate of E||psi_l||^2.
        se_psi_sq (float): Its standard error.
        mean_dpsi_norm (float): ||mean of Delta psi_l||, the size of the telescoping increment.
        mean_cost (float): Inner evaluations per draw, 2^l.
        reps (int): Number of independent draws.
    """
    level: int
    mean_dpsi_sq: float
    se_dpsi_sq: float
    mean_psi_sq: float
    se_psi_sq: float
    mean_dpsi_norm: float
    mean_cost: float
    reps: int

@dataclass(frozen=True)
class DecayFit:
    """
    Least-squares line through (l, log2 E||Delta psi_l||^2).

    Attributes:
        beta (float): Decay rate, minus the slope.
        slope (float): Fitted slope.
        intercept (float): Fitted intercept in log2 units.
        c2 (float): 2 ** intercept, the constant in E||Delta psi_l||^2 ~ c2 2^(-beta l).
        fit_range (tuple[int, int]): Inclusive level range used.
        rows (tuple[LevelMoment, ...]): All sampled levels.
    """
    beta: float
    slope: float
    intercept: float
    c2: float
    fit_range: tuple[int, int]
    rows: tuple[LevelMoment, ...] = ()

def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.shape[0]))

def level_moments(problem: CsoProblem, x, levels, reps: int, rng: RngStream) -> list[LevelMoment]:
    """
    Estimate E||Delta psi_l||^2 and E||psi_l||^2 for each requested level.

    Both statistics of one draw come from the same outer sample and inner batch.

    Args:
        problem (CsoProblem): The problem.
        x (array-like): Point at which the level statistics are evaluated.
        levels (Iterable[int]): Levels to sample.
        reps (int): Independent draws per level, at least 2.
        rng (RngStream): Stream to draw from; levels are processed in the given order.

    Returns:
        list[LevelMoment]: One row per level.

    Raises:
        InvalidArgumentError: If reps < 2 or a level is negative.
    """
    reps = require_count(reps, "reps", minimum=2)
    x = problem.check_param(x)
    levels = [int(level) for level in levels]
    if not levels:
        raise InvalidArgumentError("At least one level is required")
    if min(levels) < 0:
        raise InvalidArgumentError(f"levels must be nonnegative, got {levels}")

    rows = []
    for level in levels:
        deltas = np.empty((reps, problem.dim))
        psis = np.empty((reps, problem.dim))
        for r in range(reps):
            deltas[r], psis[r] = draw_level_statistics(problem, x, level, rng)
        mean_dpsi_sq, se_dpsi_sq = _mean_and_se(np.sum(deltas ** 2, axis=1))
        mean_psi_sq, se_psi_sq = _mean_and_se(np.sum(psis ** 2, axis=1))
        rows.append(LevelMoment(
            level=level,
            mean_dpsi_sq=mean_dpsi_sq, se_dpsi_sq=se_dpsi_sq,
            mean_psi_sq=mean_psi_sq, se_psi_sq=se_psi_sq,
            mean_dpsi_norm=float(np.linalg.norm(deltas.mean(axis=0))),
            mean_cost=float(2 ** level),
            reps=reps,
        ))
        logger.debug(f"Level {level}: E|dpsi|^2 = {mean_dpsi_sq:.6g} (se {se_dpsi_sq:.3g}), E|psi|^2 = {mean_psi_sq:.6g}")
    return rows

def fit_beta(rows: list[LevelMoment], fit_range: tuple[int, int] = DEFAULT_FIT_RANGE) -> tuple[float, float]:
    """
    Ordinary least squares of log2 E||Delta psi_l||^2 on l over fit_range.

    Args:
        rows (list[LevelMoment]): Output of level_moments.
        fit_range (tuple[int, int]): Inclusive (first, last) level.

    Returns:
        tuple[float, float]: (beta, intercept) with beta = -slope.

    Raises:
        CannotFitError: If fewer than two levels fall in the range or a moment is not positive.
    """
    first, last = fit_range
    selected = [row for row in rows if first <= row.level <= last]
    if len(selected) < 2:
        raise CannotFitError(f"Need at least two levels in [{first}, {last}], got {len(selected)}")
    bad = [row.level for row in selected if not row.mean_dpsi_sq > 0]
    if bad:
        raise CannotFitError(f"Nonpositive moment estimates at levels {bad}")

    result = stats.linregress([row.level for row in selected], np.log2([row.mean_dpsi_sq for row in selected]))
    return float(-result.slope), float(result.intercept)

def decay_fit_from_rows(rows: list[LevelMoment], fit_range: tuple[int, int] = DEFAULT_FIT_RANGE) -> DecayFit:
    """fit_beta packaged as a DecayFit together with the rows."""
    beta, intercept = fit_beta(rows, fit_range)
    logger.info(f"Fitted beta = {beta:.4f} over levels {fit_range[0]}..{fit_range[1]}")
    return DecayFit(beta=beta, slope=-beta, intercept=intercept, c2=float(2.0 ** intercept),
                    fit_range=(int(fit_range[0]), int(fit_range[1])), rows=tuple(rows))

def estimate_decay(problem: CsoProblem, x, levels, reps: int, rng: RngStream,
                   fit_range: tuple[int, int] = DEFAULT_FIT_RANGE) -> DecayFit:
    """level_moments followed by fit_beta."""
    return decay_fit_from_rows(level_moments(problem, x, levels, reps, rng), fit_range)
