# src/estimators/mlmc.py

from dataclasses import dataclass

import numpy as np

from ..problems.base import CsoProblem, InnerBatch
from ..rng.streams import RngStream, geometric_level
from ..utils.exceptions import DivergentCostError, InvalidArgumentError
from ..utils.general_utility import require_count
from .base import GradientEstimate, psi_from_means

DEFAULT_TAU = 1.5
DEFAULT_L_HARD = 40

@dataclass(frozen=True)
class LevelDistribution:
    """
    Geometric level law omega_l = (1 - 2^-tau) 2^(-tau l), l >= 0, with a hard cap.

    Attributes:
        tau (float): Decay exponent, strictly above 1 for finite expected cost.
        l_hard (int): Largest level that may be drawn; larger draws raise LevelOverflowError.
    """
    tau: float = DEFAULT_TAU
    l_hard: int = DEFAULT_L_HARD

    def __post_init__(self):
        if not self.tau > 1:
            raise DivergentCostError(f"tau must exceed 1 for finite expected cost, got {self.tau}")
        require_count(self.l_hard, "l_hard", minimum=0)

    @property
    def ratio(self) -> float:
        return 2.0 ** (-self.tau)

    def weight(self, level: int) -> float:
        """omega_l."""
        return (1.0 - self.ratio) * self.ratio ** level

    def tail_probability(self, level: int) -> float:
        """P(drawn level > level) = 2^(-tau (level + 1))."""
        return self.ratio ** (level + 1)

    def expected_cost(self) -> float:
        return expected_cost(self)

def expected_cost(dist: LevelDistribution) -> float:
    """
    Expected inner evaluations per single-term draw, sum_l omega_l 2^l
    = (1 - 2^-tau) / (1 - 2^(1 - tau)).

    Raises:
        DivergentCostError: If tau <= 1.
    """
    if not dist.tau > 1:
        raise DivergentCostError(f"Expected cost diverges for tau = {dist.tau}")
    return (1.0 - 2.0 ** (-dist.tau)) / (1.0 - 2.0 ** (1.0 - dist.tau))

def sample_level(dist: LevelDistribution, rng: RngStream) -> int:
    """Draw l with probability omega_l; raises LevelOverflowError above dist.l_hard."""
    return geometric_level(rng, dist)

@dataclass(frozen=True)
class MlmcSchedule:
    """
    Replication counts N_0, ..., N_L of the fixed-level MLMC estimator.

    Attributes:
        counts (tuple[int, ...]): N_l for l = 0..L, each at least 1.
    """
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(self.counts)
        if not counts:
            raise InvalidArgumentError("An MLMC schedule needs at least level 0")
        for level, n in enumerate(counts):
            require_count(n, f"N_{level}")
        object.__setattr__(self, 'counts', tuple(int(n) for n in counts))

    @property
    def max_level(self) -> int:
        return len(self.counts) - 1

    @property
    def cost(self) -> int:
        """sum_l N_l 2^l."""
        return sum(n * 2 ** level for level, n in enumerate(self.counts))

def level_statistics(problem: CsoProblem, x, level: int, batch: InnerBatch) -> tuple[np.ndarray, np.ndarray]:
    """
    (Delta psi_l, psi_l) from one stored batch of 2^l inner draws.

    g and grad g are evaluated once over the batch; psi_l and the two half-batch
    statistics are built from those values. The full-batch means are formed as
    the average of the half means, so affine f gives Delta psi_l = 0.

    Raises:
        InvalidArgumentError: If the batch length is not 2^l.
    """
    if level < 0:
        raise InvalidArgumentError(f"level must be nonnegative, got {level}")
    if len(batch) != 2 ** level:
        raise InvalidArgumentError(f"Level {level} needs {2 ** level} inner samples, got {len(batch)}")
    outer = batch.outer
    values, jacobians = problem.g_batch(x, batch)
    if level == 0:
        psi = psi_from_means(problem, outer, values.mean(axis=0), jacobians.mean(axis=0))
        return psi, psi

    half = 2 ** (level - 1)
    g_a, g_b = values[:half].mean(axis=0), values[half:].mean(axis=0)
    jac_a, jac_b = jacobians[:half].mean(axis=0), jacobians[half:].mean(axis=0)
    psi = psi_from_means(problem, outer, 0.5 * (g_a + g_b), 0.5 * (jac_a + jac_b))
    psi_a = psi_from_means(problem, outer, g_a, jac_a)
    psi_b = psi_from_means(problem, outer, g_b, jac_b)
    return psi - 0.5 * (psi_a + psi_b), psi

def delta_psi_from_batch(problem: CsoProblem, x, level: int, batch: InnerBatch) -> np.ndarray:
    """Antithetic difference psi_l - (psi_{l-1}^(a) + psi_{l-1}^(b)) / 2 for a given batch (psi_0 at l = 0)."""
    return level_statistics(problem, x, level, batch)[0]

def draw_level_statistics(problem: CsoProblem, x, level: int, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Draw one outer sample and 2^l inner samples, return (Delta psi_l, psi_l)."""
    outer = problem.sample_outer(rng)
    batch = problem.sample_inner(rng, outer, 2 ** level)
    return level_statistics(problem, x, level, batch)

def delta_psi(problem: CsoProblem, x, level: int, rng: RngStream) -> GradientEstimate:
    """
    One draw of the antithetic level difference Delta psi_l.

    Args:
        problem (CsoProblem): The problem.
        x (array-like): Decision variable.
        level (int): l >= 0.
        rng (RngStream): Stream to draw from.

    Returns:
        GradientEstimate: Delta psi_l with cost 2^l.
    """
    if level < 0:
        raise InvalidArgumentError(f"level must be nonnegative, got {level}")
    x = problem.check_param(x)
    delta, _ = draw_level_statistics(problem, x, level, rng)
    return GradientEstimate(delta, 2 ** level)

def fixed_level_mlmc_gradient(problem: CsoProblem, x, schedule: MlmcSchedule, rng: RngStream) -> GradientEstimate:
    """
    Truncated MLMC estimator sum_{l=0}^{L} (1/N_l) sum_m Delta psi_l^(m).

    Its mean is E[psi_L], so it is biased for finite L.

    Returns:
        GradientEstimate: The estimate with cost sum_l N_l 2^l.
    """
    x = problem.check_param(x)
    total = np.zeros(problem.dim)
    for level, n_level in enumerate(schedule.counts):
        draws = [draw_level_statistics(problem, x, level, rng)[0] for _ in range(n_level)]
        total = total + np.stack(draws).mean(axis=0)
    return GradientEstimate(total, schedule.cost)

def unbiased_mlmc_gradient(problem: CsoProblem, x, N: int, dist: LevelDistribution, rng: RngStream) -> GradientEstimate:
    """
    Single-term randomized MLMC estimator (1/N) sum_n Delta psi_{l_n} / omega_{l_n}
    with independent levels l_n ~ omega. Unbiased for grad F.

    Args:
        problem (CsoProblem): The problem.
        x (array-like): Decision variable.
        N (int): Number of independent single-term draws.
        dist (LevelDistribution): Level law.
        rng (RngStream): Stream to draw from.

    Returns:
        GradientEstimate: The estimate; cost is the realized sum_n 2^{l_n}.

    Raises:
        LevelOverflowError: If a level above dist.l_hard is drawn.
    """
    N = require_count(N, "N")
    x = problem.check_param(x)
    terms = []
    cost = 0
    for _ in range(N):
        level = sample_level(dist, rng)
        delta, _ = draw_level_statistics(problem, x, level, rng)
        terms.append(delta / dist.weight(level))
        cost += 2 ** level
    return GradientEstimate(np.stack(terms).mean(axis=0), cost)
