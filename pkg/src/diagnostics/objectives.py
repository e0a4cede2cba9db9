# src/diagnostics/objectives.py

from collections.abc import Callable

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss

from ..estimators.squared_loss import objective_unbiased
from ..problems.base import CsoProblem, SquaredLossProblem
from ..problems.discrete import DiscreteCsoProblem
from ..problems.iv import IvDataProcess, IvProblem
from ..problems.logistic import LogisticInvariantModel, softplus
from ..rng.streams import RngStream
from ..utils.exceptions import InvalidArgumentError
from ..utils.general_utility import require_count

DEFAULT_N_HAT = 1_000
DEFAULT_IV_N = 10_000
DEFAULT_IV_M = 2

ObjectiveFn = Callable[[np.ndarray, RngStream], float]

def objective_mc_logistic(model: LogisticInvariantModel, x, n_hat: int = DEFAULT_N_HAT, rng: RngStream = None) -> float:
    """
    Monte Carlo estimate of the logistic objective. E[eta | xi] = a, so the
    inner expectation is exact and only the outer one is sampled:
    mean of log(1 + exp(-b a^T x)) over n_hat fresh (a, b).
    """
    n_hat = require_count(n_hat, "n_hat")
    x = model.check_param(x)
    a, b = model.sample_outer_many(rng, n_hat)
    return float(np.mean(softplus(-b * (a @ x))))

def objective_iv(problem: IvProblem, x, n: int = DEFAULT_IV_N, m: int = DEFAULT_IV_M, rng: RngStream = None) -> float:
    """
    Bias-corrected objective estimate for the IV problem with n outer and m inner draws.

    Vectorized over all n * m network evaluations; same estimator as
    objective_unbiased.

    Raises:
        InvalidArgumentError: If m < 2.
    """
    n = require_count(n, "n")
    m = require_count(m, "m", minimum=2)
    x = problem.check_param(x)
    process = problem.process
    data = process.sample_many(rng, n)
    inner = process.sample_x_given_z_many(rng, data["Z1"], m)
    g = problem.net.forward(x, inner.ravel()).reshape(n, m)
    g_bar = g.mean(axis=1)
    correction = np.sum((g - g_bar[:, None]) ** 2, axis=1) / (m * (m - 1))
    return float(np.mean((data["Y"] - g_bar) ** 2 - correction))

def exact_objective(problem: DiscreteCsoProblem, x, rng: RngStream = None) -> float:
    """F(x) by enumeration; rng is accepted for a uniform evaluator signature."""
    return problem.exact_objective(x)

def objective_for(problem: CsoProblem, n_hat: int = DEFAULT_N_HAT,
                  n: int = DEFAULT_IV_N, m: int = DEFAULT_IV_M) -> ObjectiveFn:
    """
    The objective evaluator used for a problem's optimization traces.

    Args:
        problem (CsoProblem): The problem being optimized.
        n_hat (int): Outer draws for the logistic estimate.
        n (int): Outer draws for squared-loss estimates.
        m (int): Inner draws for squared-loss estimates.

    Returns:
        ObjectiveFn: Callable (x, rng) -> float.

    Raises:
        InvalidArgumentError: If no evaluator exists for the problem type.
    """
    if isinstance(problem, DiscreteCsoProblem):
        return lambda x, rng: exact_objective(problem, x, rng)
    if isinstance(problem, LogisticInvariantModel):
        return lambda x, rng: objective_mc_logistic(problem, x, n_hat, rng)
    if isinstance(problem, IvProblem):
        return lambda x, rng: objective_iv(problem, x, n, m, rng)
    if isinstance(problem, SquaredLossProblem):
        return lambda x, rng: objective_unbiased(problem, x, m, n, rng)
    raise InvalidArgumentError(f"No objective evaluator for {type(problem).__name__}")

def iv_noise_floor(process: IvDataProcess, n_nodes: int = 64) -> float:
    """
    E_Z[Var(Y | Z)], the smallest value the IV objective can take; it is
    attained by g = f. Computed with Gauss-Legendre nodes over Z1 and
    Gauss-Hermite nodes over (e, gamma).

    Args:
        process (IvDataProcess): The data-generating process.
        n_nodes (int): Nodes per dimension.

    Returns:
        float: The noise floor.
    """
    h_nodes, h_weights = hermegauss(n_nodes)
    h_weights = h_weights / np.sqrt(2.0 * np.pi)
    l_nodes, l_weights = leggauss(n_nodes)
    half_width = 0.5 * (process.z_high - process.z_low)
    z1 = process.z_low + half_width * (l_nodes + 1.0)
    z_weights = l_weights / 2.0

    e = np.sqrt(process.var_e) * h_nodes
    gamma = np.sqrt(process.var_gamma) * h_nodes
    joint_weights = np.outer(h_weights, h_weights)

    x = (z1[:, None, None] + e[None, :, None]) / 2.0 + gamma[None, None, :]
    signal = process.truth(x) + e[None, :, None]
    first = np.sum(joint_weights * signal, axis=(1, 2))
    second = np.sum(joint_weights * signal ** 2, axis=(1, 2))
    conditional_var = second - first ** 2 + process.var_delta
    return float(np.sum(z_weights * conditional_var))
