# src/estimators/nested_mc.py

import numpy as np

from ..problems.base import CsoProblem
from ..rng.streams import RngStream
from ..utils.general_utility import require_count
from .base import GradientEstimate, psi_from_means

def nested_mc_gradient(problem: CsoProblem, x, M: int, N: int, rng: RngStream) -> GradientEstimate:
    """
    Nested Monte Carlo gradient: average over N outer draws of the plug-in gradient
    built from M inner draws each. Biased whenever grad f is nonlinear.

    Args:
        problem (CsoProblem): The problem.
        x (array-like): Decision variable.
        M (int): Inner draws per outer draw.
        N (int): Outer draws.
        rng (RngStream): Stream to draw from.

    Returns:
        GradientEstimate: The estimate with cost N * M.

    Raises:
        InvalidArgumentError: If M or N is below 1.
    """
    M = require_count(M, "M")
    N = require_count(N, "N")
    x = problem.check_param(x)
    psis = []
    for _ in range(N):
        outer = problem.sample_outer(rng)
        batch = problem.sample_inner(rng, outer, M)
        values, jacobians = problem.g_batch(x, batch)
        psis.append(psi_from_means(problem, outer, values.mean(axis=0), jacobians.mean(axis=0)))
    return GradientEstimate(np.stack(psis).mean(axis=0), N * M)
