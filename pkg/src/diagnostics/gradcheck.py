# src/diagnostics/gradcheck.py

from collections.abc import Callable
from dataclasses import asdict, dataclass

import numpy as np

from ..problems.base import CsoProblem
from ..rng.streams import RngStream
from ..utils.exceptions import InvalidArgumentError
from ..utils.general_utility import require_count
from ..utils.logger import logger

DEFAULT_STEP = 1e-5
DEFAULT_TOL = 1e-5
DEFAULT_KINK_MARGIN = 1e-3
MAX_KINK_REDRAWS = 1000

@dataclass(frozen=True)
class GradCheckEntry:
    """The worst mismatch found: which map, which coordinate, and the two values."""
    check: str
    coordinate: int
    analytic: float
    numeric: float
    rel_err: float

@dataclass(frozen=True)
class GradCheckReport:
    """
    Outcome of a finite-difference gradient check.

    Attributes:
        passed (bool): True iff max_rel_err < tol.
        max_rel_err (float): Largest relative error over all checks and points.
        worst (GradCheckEntry | None): Location of max_rel_err.
        step (float): Central-difference step used.
        tol (float): Pass threshold.
        n_points (int): Number of sampled (outer, inner) points.
    """
    passed: bool
    max_rel_err: float
    worst: GradCheckEntry | None
    step: float
    tol: float
    n_points: int

    def to_dict(self) -> dict:
        return asdict(self)

def relative_error(analytic, numeric) -> np.ndarray:
    """|a - n| / max(|a|, |n|, 1)."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1.0)
    return np.abs(analytic - numeric) / scale

def central_difference(fn: Callable[[np.ndarray], np.ndarray], point: np.ndarray, step: float) -> np.ndarray:
    """
    Jacobian of fn at point by central differences, shape (len(fn(point)), len(point)).
    """
    point = np.asarray(point, dtype=np.float64)
    columns = []
    for j in range(point.shape[0]):
        offset = np.zeros_like(point)
        offset[j] = step
        forward = np.atleast_1d(fn(point + offset))
        backward = np.atleast_1d(fn(point - offset))
        columns.append((forward - backward) / (2.0 * step))
    return np.stack(columns, axis=-1)

def _worst(check: str, analytic: np.ndarray, numeric: np.ndarray) -> GradCheckEntry:
    errors = relative_error(analytic, numeric).ravel()
    index = int(np.argmax(errors))
    coordinate = index % analytic.shape[-1] if analytic.ndim > 1 else index
    return GradCheckEntry(check, coordinate, float(analytic.ravel()[index]),
                          float(numeric.ravel()[index]), float(errors[index]))

def _draw_smooth_point(problem: CsoProblem, x: np.ndarray, rng: RngStream, margin: float):
    for _ in range(MAX_KINK_REDRAWS):
        outer = problem.sample_outer(rng)
        inner = problem.sample_inner(rng, outer, 1)[0]
        if not problem.near_kink(x, outer, inner, margin):
            return outer, inner
    raise InvalidArgumentError(f"No draw stayed {margin} away from a kink in {MAX_KINK_REDRAWS} tries")

def grad_check(problem: CsoProblem, x, step: float = DEFAULT_STEP, tol: float = DEFAULT_TOL,
               rng: RngStream = None, n_points: int = 1,
               kink_margin: float = DEFAULT_KINK_MARGIN) -> GradCheckReport:
    """
    Compare analytic derivatives with central differences at sampled points.

    Three maps are checked at each point: g in x against g_grad, f in v
    against f_grad, and the pathwise integrand x -> f(g(x)) against
    g_grad^T f_grad. Draws that land within kink_margin of a non-smooth point
    of g (e.g. a rectifier at 0) are redrawn.

    Args:
        problem (CsoProblem): The problem to check.
        x (array-like): Decision variable.
        step (float): Finite-difference step, > 0.
        tol (float): Pass threshold on the relative error.
        rng (RngStream): Stream for the sampled (outer, inner) points.
        n_points (int): Number of points.
        kink_margin (float): Rejection margin around kinks.

    Returns:
        GradCheckReport: The report; failures are reported, not raised.

    Raises:
        InvalidArgumentError: If step <= 0 or n_points < 1.
    """
    if not step > 0:
        raise InvalidArgumentError(f"step must be positive, got {step}")
    n_points = require_count(n_points, "n_points")
    x = problem.check_param(x)

    max_err, worst = 0.0, None
    for _ in range(n_points):
        outer, inner = _draw_smooth_point(problem, x, rng, kink_margin)
        v = problem.g_eval(x, outer, inner)
        g_jac = problem.g_grad(x, outer, inner)
        f_grad = problem.f_grad(outer, v)

        comparisons = [
            ("g", g_jac, central_difference(lambda p: problem.g_eval(p, outer, inner), x, step)),
            ("f", f_grad[None, :], central_difference(lambda w: problem.f_eval(outer, w), v, step)),
            ("f_of_g", (g_jac.T @ f_grad)[None, :],
             central_difference(lambda p: problem.f_eval(outer, problem.g_eval(p, outer, inner)), x, step)),
        ]
        for check, analytic, numeric in comparisons:
            entry = _worst(check, analytic, numeric)
            if worst is None or entry.rel_err > max_err:
                max_err, worst = entry.rel_err, entry

    passed = bool(max_err < tol)
    logger.info(f"Gradient check on {type(problem).__name__}: max rel err {max_err:.3e} "
                f"over {n_points} points, {'pass' if passed else 'FAIL'}")
    return GradCheckReport(passed, float(max_err), worst, float(step), float(tol), n_points)
