# src/estimators/base.py

from dataclasses import dataclass

import numpy as np

from ..problems.base import CsoProblem, InnerBatch, OuterSample
from ..utils.exceptions import InvalidArgumentError, NonFiniteEstimateError

@dataclass(frozen=True, eq=False)
class GradientEstimate:
    """
    A gradient estimate paired with the number of inner g / grad-g evaluations it consumed.

    Attributes:
        value (np.ndarray): The estimate in R^d.
        cost (int): Inner-sample evaluations, always positive.
    """
    value: np.ndarray
    cost: int

    def __post_init__(self):
        value = np.array(self.value, dtype=np.float64)
        if int(self.cost) <= 0:
            raise InvalidArgumentError(f"cost must be positive, got {self.cost}")
        if not np.all(np.isfinite(value)):
            raise NonFiniteEstimateError("Gradient estimate contains non-finite entries")
        value.setflags(write=False)
        object.__setattr__(self, 'value', value)
        object.__setattr__(self, 'cost', int(self.cost))

def psi_from_means(problem: CsoProblem, outer: OuterSample, mean_g: np.ndarray, mean_jac: np.ndarray) -> np.ndarray:
    """(mean grad g)^T grad f_xi(mean g), the plug-in gradient for one outer draw."""
    return mean_jac.T @ problem.f_grad(outer, mean_g)

def psi_level(problem: CsoProblem, x, level: int, outer: OuterSample, inners: InnerBatch) -> np.ndarray:
    """
    Level statistic psi_l: the nested gradient for one outer draw and 2^l inner draws.

    Args:
        problem (CsoProblem): The problem.
        x (array-like): Decision variable.
        level (int): The level l.
        outer (OuterSample): The outer draw.
        inners (InnerBatch): Exactly 2^l inner draws conditioned on outer.

    Returns:
        np.ndarray: psi_l in R^d.

    Raises:
        InvalidArgumentError: If the batch length is not 2^l.
    """
    if level < 0:
        raise InvalidArgumentError(f"level must be nonnegative, got {level}")
    if len(inners) != 2 ** level:
        raise InvalidArgumentError(f"Level {level} needs {2 ** level} inner samples, got {len(inners)}")
    values, jacobians = problem.g_batch(x, inners)
    return psi_from_means(problem, outer, values.mean(axis=0), jacobians.mean(axis=0))
