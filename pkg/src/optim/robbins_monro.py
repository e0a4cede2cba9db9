# src/optim/robbins_monro.py

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..diagnostics.objectives import ObjectiveFn, objective_for
from ..estimators.base import GradientEstimate
from ..estimators.mlmc import (
    LevelDistribution,
    MlmcSchedule,
    expected_cost,
    fixed_level_mlmc_gradient,
    unbiased_mlmc_gradient,
)
from ..estimators.nested_mc import nested_mc_gradient
from ..estimators.squared_loss import grad_estimator_1, grad_estimator_2, grad_estimator_3
from ..problems.base import CsoProblem, SquaredLossProblem
from ..problems.discrete import DiscreteCsoProblem
from ..rng.streams import RngStream, StreamKey, StreamRole, derive
from ..utils.exceptions import DivergenceError, InvalidArgumentError, NonFiniteEstimateError
from ..utils.general_utility import require_count
from ..utils.logger import logger

DIVERGENCE_NORM = 1e12
TARGET_EVALUATIONS = 200

class StepKind(Enum):
    CONSTANT = "constant"
    INVERSE_T = "inverse_t"

@dataclass(frozen=True)
class StepSchedule:
    """
    Step sizes gamma_t of the recursion.

    Attributes:
        gamma0 (float): Initial step, > 0.
        kind (StepKind): CONSTANT keeps gamma0; INVERSE_T uses gamma0 / (t + 1).
    """
    gamma0: float
    kind: StepKind = StepKind.CONSTANT

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, 'kind', StepKind(self.kind))
        if not (self.gamma0 > 0 and math.isfinite(self.gamma0)):
            raise InvalidArgumentError(f"gamma0 must be positive and finite, got {self.gamma0}")

    def gamma(self, t: int) -> float:
        if self.kind is StepKind.INVERSE_T:
            return self.gamma0 / (t + 1)
        return self.gamma0

class EstimatorConfig(ABC):
    """A gradient estimator together with its parameters."""

    kind: str
    # MLMC budgets are charged at the expected cost; the others are deterministic.
    uses_expected_cost: bool = False

    @abstractmethod
    def estimate(self, problem: CsoProblem, x: np.ndarray, rng: RngStream) -> GradientEstimate:
        """One gradient estimate at x."""

    @property
    @abstractmethod
    def cost_per_iteration(self) -> float:
        """Inner evaluations charged to the budget per iteration."""

    @abstractmethod
    def to_dict(self) -> dict:
        """Plain-data echo for run_config.json."""

@dataclass(frozen=True)
class NestedMcConfig(EstimatorConfig):
    M: int = 1
    N: int = 1
    kind = "nested_mc"

    def __post_init__(self):
        require_count(self.M, "M")
        require_count(self.N, "N")

    def estimate(self, problem, x, rng):
        return nested_mc_gradient(problem, x, self.M, self.N, rng)

    @property
    def cost_per_iteration(self) -> float:
        return float(self.M * self.N)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "M": self.M, "N": self.N}

@dataclass(frozen=True)
class UnbiasedMlmcConfig(EstimatorConfig):
    N: int = 1
    dist: LevelDistribution = field(default_factory=LevelDistribution)
    kind = "mlmc"
    uses_expected_cost = True

    def __post_init__(self):
        require_count(self.N, "N")

    def estimate(self, problem, x, rng):
        return unbiased_mlmc_gradient(problem, x, self.N, self.dist, rng)

    @property
    def cost_per_iteration(self) -> float:
        return expected_cost(self.dist) * self.N

    def to_dict(self) -> dict:
        return {"kind": self.kind, "N": self.N, "tau": self.dist.tau, "l_hard": self.dist.l_hard}

@dataclass(frozen=True)
class FixedLevelMlmcConfig(EstimatorConfig):
    schedule: MlmcSchedule
    kind = "fixed_mlmc"

    def estimate(self, problem, x, rng):
        return fixed_level_mlmc_gradient(problem, x, self.schedule, rng)

    @property
    def cost_per_iteration(self) -> float:
        return float(self.schedule.cost)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "counts": list(self.schedule.counts)}

@dataclass(frozen=True)
class SquaredLossConfig(EstimatorConfig):
    """
    One of the three squared-loss gradient estimators.

    Attributes:
        variant (int): 1, 2 or 3.
        M (int): Inner batch size; variant 3 needs M >= 2.
        N (int): Outer draws.
    """
    variant: int
    M: int = 2
    N: int = 1
    kind = "squared_loss"

    def __post_init__(self):
        if self.variant not in (1, 2, 3):
            raise InvalidArgumentError(f"variant must be 1, 2 or 3, got {self.variant!r}")
        require_count(self.M, "M", minimum=2 if self.variant == 3 else 1)
        require_count(self.N, "N")

    def estimate(self, problem, x, rng):
        if not isinstance(problem, SquaredLossProblem):
            raise InvalidArgumentError(f"Squared-loss estimators need a squared-loss problem, got {type(problem).__name__}")
        estimator = {1: grad_estimator_1, 2: grad_estimator_2, 3: grad_estimator_3}[self.variant]
        return estimator(problem, x, self.M, self.N, rng)

    @property
    def cost_per_iteration(self) -> float:
        per_outer = self.M if self.variant == 3 else 2 * self.M
        return float(per_outer * self.N)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "variant": self.variant, "M": self.M, "N": self.N}

@dataclass(frozen=True)
class ExactGradientConfig(EstimatorConfig):
    """Zero-variance 'estimator' returning the enumerated gradient of a finite-support problem."""
    kind = "exact"

    def estimate(self, problem, x, rng):
        if not isinstance(problem, DiscreteCsoProblem):
            raise InvalidArgumentError("The exact gradient is only available for finite-support problems")
        return GradientEstimate(problem.exact_gradient(x), 1)

    @property
    def cost_per_iteration(self) -> float:
        return 1.0

    def to_dict(self) -> dict:
        return {"kind": self.kind}

def budget_accounting(config: EstimatorConfig) -> float:
    """
    Cost charged per iteration: M N for nested MC, expected_cost(dist) N for
    unbiased MLMC, sum N_l 2^l for fixed-level MLMC, 2MN or MN for the
    squared-loss estimators.
    """
    return config.cost_per_iteration

@dataclass(frozen=True, eq=False)
class TraceRow:
    iteration: int
    cost_expected: float
    cost_actual: int
    objective: float
    params: np.ndarray | None = None

@dataclass(eq=False)
class RunTrace:
    """
    History of one optimization run.

    Attributes:
        seed (int): Master seed of the gradient stream.
        config (dict): Echo of the estimator, step schedule and budget.
        iterations (int): Planned number of iterations T.
        rows (list[TraceRow]): Objective evaluations in iteration order.
        step_costs (list[int]): Actual cost of every completed iteration.
        final_params (np.ndarray | None): Last iterate, set when the run finishes.
    """
    seed: int
    config: dict
    iterations: int
    rows: list[TraceRow] = field(default_factory=list)
    step_costs: list[int] = field(default_factory=list)
    final_params: np.ndarray | None = None

    @property
    def final_objective(self) -> float:
        return self.rows[-1].objective

    @property
    def mean_step_cost(self) -> float:
        return float(np.mean(self.step_costs)) if self.step_costs else 0.0

def default_eval_every(iterations: int) -> int:
    return max(1, iterations // TARGET_EVALUATIONS)

def robbins_monro(problem: CsoProblem, config: EstimatorConfig, x0, schedule: StepSchedule,
                  cost_budget: float, eval_every: int | None = None, rng: RngStream = None,
                  objective: ObjectiveFn | None = None, objective_key: StreamKey | None = None,
                  snapshot_params: bool = False) -> RunTrace:
    """
    Stochastic gradient descent x_{t+1} = x_t - gamma_t * estimate(x_t) under a cost budget.

    The number of iterations is T = floor(cost_budget / budget_accounting(config)),
    so the charged cost (expected cost for MLMC) never exceeds the budget. The
    objective is evaluated at t = 0, every eval_every iterations and at t = T,
    each evaluation on its own stream so the gradient stream is untouched.

    Args:
        problem (CsoProblem): The problem.
        config (EstimatorConfig): Gradient estimator.
        x0 (array-like): Starting point.
        schedule (StepSchedule): Step sizes.
        cost_budget (float): Total budget in inner evaluations, > 0.
        eval_every (int | None): Evaluation cadence. Defaults to about 200 evaluations per run.
        rng (RngStream): Gradient stream.
        objective (ObjectiveFn | None): Evaluator (x, rng) -> float. Defaults to objective_for(problem).
        objective_key (StreamKey | None): Parent key of the evaluation streams.
            Defaults to the gradient key extended by StreamRole.OBJECTIVE.
        snapshot_params (bool): Store x in every trace row.

    Returns:
        RunTrace: The recorded history.

    Raises:
        InvalidArgumentError: If the budget is not positive.
        DivergenceError: If an iterate or estimate becomes non-finite or ||x|| exceeds 1e12.
    """
    if not (cost_budget > 0 and math.isfinite(cost_budget)):
        raise InvalidArgumentError(f"cost_budget must be positive and finite, got {cost_budget}")
    per_step = budget_accounting(config)
    iterations = int(math.floor(cost_budget / per_step))
    eval_every = default_eval_every(iterations) if eval_every is None else require_count(eval_every, "eval_every")
    objective = objective or objective_for(problem)
    objective_key = objective_key or rng.key.child(StreamRole.OBJECTIVE)

    x = problem.check_param(x0).copy()
    trace = RunTrace(seed=rng.key.seed, iterations=iterations, config={
        "estimator": config.to_dict(),
        "step": {"gamma0": schedule.gamma0, "kind": schedule.kind.value},
        "cost_budget": cost_budget,
        "cost_per_iteration": per_step,
        "eval_every": eval_every,
    })
    cost_actual = 0

    def record(t: int):
        value = objective(x, derive(objective_key.child(len(trace.rows))))
        trace.rows.append(TraceRow(t, t * per_step, cost_actual, float(value),
                                   x.copy() if snapshot_params else None))

    logger.info(f"Robbins-Monro start: {config.to_dict()}, budget {cost_budget}, "
                f"{per_step:.6g} per step, T = {iterations}")
    record(0)
    for t in range(iterations):
        try:
            estimate = config.estimate(problem, x, rng)
        except NonFiniteEstimateError as e:
            raise DivergenceError(f"Non-finite gradient estimate at iteration {t}", t, trace) from e
        x = x - schedule.gamma(t) * estimate.value
        cost_actual += estimate.cost
        trace.step_costs.append(estimate.cost)
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > DIVERGENCE_NORM:
            trace.final_params = x
            raise DivergenceError(f"Iterate diverged at iteration {t + 1}", t + 1, trace)
        if (t + 1) % eval_every == 0 or t + 1 == iterations:
            record(t + 1)

    trace.final_params = x
    logger.info(f"Robbins-Monro done: {iterations} iterations, actual cost {cost_actual}, "
                f"final objective {trace.final_objective:.6g}")
    return trace
