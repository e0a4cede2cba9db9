# src/estimators/squared_loss.py

import numpy as np

from ..problems.base import InnerBatch, OuterSample, SquaredLossProblem
from ..rng.streams import RngStream
from ..utils.general_utility import require_count
from .base import GradientEstimate

def _scalar_batch(problem: SquaredLossProblem, x, batch: InnerBatch) -> tuple[np.ndarray, np.ndarray]:
    values, jacobians = problem.g_batch(x, batch)
    return values[:, 0], jacobians[:, 0, :]

def u_eval(problem: SquaredLossProblem, outer: OuterSample) -> float:
    return problem.u_eval(outer)

# Per-outer-sample kernels. Each is the N = 1 estimator for given inner batches,
# which is what the exhaustive-enumeration tests and variance_compare evaluate.

def estimator_1_kernel(problem: SquaredLossProblem, x, outer: OuterSample,
                       batch_a: InnerBatch, batch_b: InnerBatch) -> np.ndarray:
    """-2 (u - mean g over a) (mean grad g over b)."""
    g_a, _ = _scalar_batch(problem, x, batch_a)
    _, jac_b = _scalar_batch(problem, x, batch_b)
    return -2.0 * (problem.u_eval(outer) - g_a.mean()) * jac_b.mean(axis=0)

def estimator_2_kernel(problem: SquaredLossProblem, x, outer: OuterSample,
                       batch_a: InnerBatch, batch_b: InnerBatch) -> np.ndarray:
    """Estimator 1 symmetrized over the roles of the two batches."""
    u = problem.u_eval(outer)
    g_a, jac_a = _scalar_batch(problem, x, batch_a)
    g_b, jac_b = _scalar_batch(problem, x, batch_b)
    return -((u - g_a.mean()) * jac_b.mean(axis=0) + (u - g_b.mean()) * jac_a.mean(axis=0))

def estimator_3_kernel(problem: SquaredLossProblem, x, outer: OuterSample, batch: InnerBatch) -> np.ndarray:
    """
    Gradient of the bias-corrected objective for one batch of M >= 2 draws:
    -2 (u - g_bar) grad_g_bar - 2/(M(M-1)) sum_m (g_m - g_bar)(grad g_m - grad_g_bar).

    Evaluated in the equivalent pairwise form -2/(M(M-1)) sum_{i != j} (u - g_i) grad g_j,
    which reproduces estimator 2 at M = 1 exactly when the batch is the two
    single-draw batches concatenated.
    """
    M = require_count(len(batch), "M", minimum=2)
    values, jacobians = _scalar_batch(problem, x, batch)
    residuals = problem.u_eval(outer) - values
    pairs = residuals[:, None, None] * jacobians[None, :, :]
    off_diagonal = ~np.eye(M, dtype=bool)
    return -(2.0 / (M * (M - 1))) * pairs[off_diagonal].sum(axis=0)

def objective_biased_kernel(problem: SquaredLossProblem, x, outer: OuterSample, batch: InnerBatch) -> float:
    """(u - g_bar)^2."""
    values, _ = _scalar_batch(problem, x, batch)
    residual = problem.u_eval(outer) - values.mean()
    return float(residual * residual)

def objective_unbiased_kernel(problem: SquaredLossProblem, x, outer: OuterSample, batch: InnerBatch) -> float:
    """(u - g_bar)^2 minus the sample variance of g divided by M."""
    M = require_count(len(batch), "M", minimum=2)
    values, _ = _scalar_batch(problem, x, batch)
    g_bar = values.mean()
    residual = problem.u_eval(outer) - g_bar
    correction = np.sum((values - g_bar) ** 2) / (M * (M - 1))
    return float(residual * residual - correction)

def _two_batch_estimate(kernel, problem: SquaredLossProblem, x, M: int, N: int, rng: RngStream) -> GradientEstimate:
    M = require_count(M, "M")
    N = require_count(N, "N")
    x = problem.check_param(x)
    terms = []
    for _ in range(N):
        outer = problem.sample_outer(rng)
        batch_a = problem.sample_inner(rng, outer, M)
        batch_b = problem.sample_inner(rng, outer, M)
        terms.append(kernel(problem, x, outer, batch_a, batch_b))
    return GradientEstimate(np.stack(terms).mean(axis=0), 2 * M * N)

def grad_estimator_1(problem: SquaredLossProblem, x, M: int, N: int, rng: RngStream) -> GradientEstimate:
    """
    Unbiased gradient from two disjoint inner batches per outer draw: one for
    the residual, one for the gradient factor. Cost 2MN.
    """
    return _two_batch_estimate(estimator_1_kernel, problem, x, M, N, rng)

def grad_estimator_2(problem: SquaredLossProblem, x, M: int, N: int, rng: RngStream) -> GradientEstimate:
    """Symmetrized two-batch unbiased gradient. Cost 2MN."""
    return _two_batch_estimate(estimator_2_kernel, problem, x, M, N, rng)

def grad_estimator_3(problem: SquaredLossProblem, x, M: int, N: int, rng: RngStream) -> GradientEstimate:
    """
    Unbiased gradient of the bias-corrected objective from a single batch of M >= 2
    draws per outer draw. Cost MN.

    Raises:
        InvalidArgumentError: If M < 2 (the variance correction is undefined).
    """
    M = require_count(M, "M", minimum=2)
    N = require_count(N, "N")
    x = problem.check_param(x)
    terms = []
    for _ in range(N):
        outer = problem.sample_outer(rng)
        batch = problem.sample_inner(rng, outer, M)
        terms.append(estimator_3_kernel(problem, x, outer, batch))
    return GradientEstimate(np.stack(terms).mean(axis=0), M * N)

def _objective(kernel, problem: SquaredLossProblem, x, M: int, N: int, rng: RngStream) -> float:
    N = require_count(N, "N")
    x = problem.check_param(x)
    total = 0.0
    for _ in range(N):
        outer = problem.sample_outer(rng)
        total += kernel(problem, x, outer, problem.sample_inner(rng, outer, M))
    return total / N

def objective_biased(problem: SquaredLossProblem, x, M: int, N: int, rng: RngStream) -> float:
    """
    Plug-in objective (1/N) sum_n (u - g_bar)^2. Its mean exceeds F(x) by
    E_xi[Var(g | xi)] / M.
    """
    M = require_count(M, "M")
    return _objective(objective_biased_kernel, problem, x, M, N, rng)

def objective_unbiased(problem: SquaredLossProblem, x, M: int, N: int, rng: RngStream) -> float:
    """
    Bias-corrected objective: the plug-in value minus the per-outer sample
    variance of g over M. E[output] = F(x).

    Raises:
        InvalidArgumentError: If M < 2.
    """
    M = require_count(M, "M", minimum=2)
    return _objective(objective_unbiased_kernel, problem, x, M, N, rng)
