# src/problems/discrete.py

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ..rng.streams import RngStream
from ..utils.exceptions import InvalidArgumentError
from .base import CsoProblem, InnerBatch, OuterSample, SquaredLossProblem

PROBABILITY_TOLERANCE = 1e-12

@dataclass(frozen=True)
class DiscreteOuter(OuterSample):
    """An outer draw from a finite support: its support index and value."""
    index: int
    value: float

def _check_distribution(probs: Sequence[float], what: str) -> np.ndarray:
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgumentError(f"{what}: support must be non-empty")
    if np.any(arr < 0):
        raise InvalidArgumentError(f"{what}: probabilities must be nonnegative")
    if abs(arr.sum() - 1.0) > PROBABILITY_TOLERANCE:
        raise InvalidArgumentError(f"{what}: probabilities sum to {arr.sum()!r}, not 1")
    return arr

class DiscreteCsoProblem(CsoProblem):
    """
    CSO problem with finite outer and inner supports and closed-form maps.

    Expectations over such a problem can be enumerated exactly, which makes it
    the ground truth for unbiasedness tests.

    Args:
        outer_values (Sequence[float]): Support points of xi.
        outer_probs (Sequence[float]): Their probabilities.
        inner_values (Sequence[Sequence[float]]): For each outer point, the support of eta.
        inner_probs (Sequence[Sequence[float]]): The matching conditional probabilities.
        g (Callable): g(x, xi, eta) -> array of shape (k,).
        g_jac (Callable): g_jac(x, xi, eta) -> array of shape (k, d).
        f (Callable): f(xi, v) -> float.
        f_grad (Callable): f_grad(xi, v) -> array of shape (k,).
        dim (int): d.
        out_dim (int): k.
    """

    def __init__(self,
                 outer_values: Sequence[float],
                 outer_probs: Sequence[float],
                 inner_values: Sequence[Sequence[float]],
                 inner_probs: Sequence[Sequence[float]],
                 g: Callable, g_jac: Callable, f: Callable, f_grad: Callable,
                 dim: int = 1, out_dim: int = 1):
        self._outer_values = np.asarray(outer_values, dtype=np.float64)
        self._outer_probs = _check_distribution(outer_probs, "outer")
        if self._outer_values.shape != self._outer_probs.shape:
            raise InvalidArgumentError("outer values and probabilities differ in length")
        if len(inner_values) != len(self._outer_values) or len(inner_probs) != len(self._outer_values):
            raise InvalidArgumentError("one inner support is needed per outer support point")
        self._inner_values = [np.asarray(values, dtype=np.float64) for values in inner_values]
        self._inner_probs = [_check_distribution(probs, f"inner[{i}]") for i, probs in enumerate(inner_probs)]
        for i, (values, probs) in enumerate(zip(self._inner_values, self._inner_probs)):
            if values.shape != probs.shape:
                raise InvalidArgumentError(f"inner[{i}]: values and probabilities differ in length")
        self._g, self._g_jac, self._f, self._f_grad = g, g_jac, f, f_grad
        self.dim = dim
        self.out_dim = out_dim

    def outer_support(self) -> list[tuple[DiscreteOuter, float]]:
        """All outer points with their probabilities."""
        return [(DiscreteOuter(i, float(v)), float(p))
                for i, (v, p) in enumerate(zip(self._outer_values, self._outer_probs))]

    def inner_support(self, outer: DiscreteOuter) -> list[tuple[float, float]]:
        """All inner points given outer, with their conditional probabilities."""
        return [(float(v), float(p)) for v, p in zip(self._inner_values[outer.index], self._inner_probs[outer.index])]

    def sample_outer(self, rng: RngStream) -> DiscreteOuter:
        index = int(rng.categorical(self._outer_probs))
        return DiscreteOuter(index, float(self._outer_values[index]))

    def _draw_inner(self, rng: RngStream, outer: DiscreteOuter, m: int) -> np.ndarray:
        indices = rng.categorical(self._inner_probs[outer.index], size=m)
        return self._inner_values[outer.index][indices]

    def g_eval(self, x, outer: DiscreteOuter, inner) -> np.ndarray:
        x = self.check_param(x)
        return np.atleast_1d(np.asarray(self._g(x, outer.value, float(inner)), dtype=np.float64))

    def g_grad(self, x, outer: DiscreteOuter, inner) -> np.ndarray:
        x = self.check_param(x)
        return np.asarray(self._g_jac(x, outer.value, float(inner)), dtype=np.float64).reshape(self.out_dim, self.dim)

    def g_batch(self, x, batch: InnerBatch) -> tuple[np.ndarray, np.ndarray]:
        x = self.check_param(x)
        xi = batch.outer.value
        values = np.stack([np.atleast_1d(np.asarray(self._g(x, xi, float(eta)), dtype=np.float64))
                           for eta in batch.samples])
        jacobians = np.stack([np.asarray(self._g_jac(x, xi, float(eta)), dtype=np.float64).reshape(self.out_dim, self.dim)
                              for eta in batch.samples])
        return values, jacobians

    def f_eval(self, outer: DiscreteOuter, v) -> float:
        return float(self._f(outer.value, self.check_value(v)))

    def f_grad(self, outer: DiscreteOuter, v) -> np.ndarray:
        return np.atleast_1d(np.asarray(self._f_grad(outer.value, self.check_value(v)), dtype=np.float64))

    def _inner_means(self, x: np.ndarray, outer: DiscreteOuter) -> tuple[np.ndarray, np.ndarray]:
        mean_g = np.zeros(self.out_dim)
        mean_jac = np.zeros((self.out_dim, self.dim))
        for eta, prob in self.inner_support(outer):
            mean_g += prob * self.g_eval(x, outer, eta)
            mean_jac += prob * self.g_grad(x, outer, eta)
        return mean_g, mean_jac

    def exact_gradient(self, x) -> np.ndarray:
        """
        Exact grad F(x) = E_xi[ E[grad g | xi]^T grad f_xi(E[g | xi]) ] by enumeration.

        Args:
            x (array-like): Decision variable.

        Returns:
            np.ndarray: The gradient in R^d.
        """
        x = self.check_param(x)
        total = np.zeros(self.dim)
        for outer, prob in self.outer_support():
            mean_g, mean_jac = self._inner_means(x, outer)
            total += prob * (mean_jac.T @ self.f_grad(outer, mean_g))
        return total

    def exact_objective(self, x) -> float:
        """Exact F(x) by enumeration."""
        x = self.check_param(x)
        total = 0.0
        for outer, prob in self.outer_support():
            mean_g, _ = self._inner_means(x, outer)
            total += prob * self.f_eval(outer, mean_g)
        return total

class DiscreteSquaredLossProblem(DiscreteCsoProblem, SquaredLossProblem):
    """
    Finite-support squared-loss problem: f_xi(v) = (u(xi) - v)^2 with scalar g.

    Args:
        u (Callable): u(xi) -> float, the observable.
        Remaining arguments as for DiscreteCsoProblem, minus f and f_grad.
    """

    def __init__(self, outer_values, outer_probs, inner_values, inner_probs,
                 g: Callable, g_jac: Callable, u: Callable, dim: int = 1):
        super().__init__(outer_values, outer_probs, inner_values, inner_probs,
                         g=g, g_jac=g_jac, f=None, f_grad=None, dim=dim, out_dim=1)
        self._u = u
        self._require_scalar_output()

    def u_eval(self, outer: DiscreteOuter) -> float:
        return float(self._u(outer.value))

    def f_eval(self, outer: DiscreteOuter, v) -> float:
        return SquaredLossProblem.f_eval(self, outer, v)

    def f_grad(self, outer: DiscreteOuter, v) -> np.ndarray:
        return SquaredLossProblem.f_grad(self, outer, v)

def _linear_g(x, xi, eta):
    return np.array([x[0] * eta])

def _linear_g_jac(x, xi, eta):
    return np.array([[eta]])

def oracle_a() -> DiscreteCsoProblem:
    """
    xi uniform on {0, 1}; eta | xi=0 uniform on {1, 3}; eta | xi=1 uniform on {0, 2};
    g = x * eta, f = v^2. grad F(x) = 5x.
    """
    return DiscreteCsoProblem(
        outer_values=[0.0, 1.0], outer_probs=[0.5, 0.5],
        inner_values=[[1.0, 3.0], [0.0, 2.0]], inner_probs=[[0.5, 0.5], [0.5, 0.5]],
        g=_linear_g, g_jac=_linear_g_jac,
        f=lambda xi, v: v[0] ** 2, f_grad=lambda xi, v: 2.0 * v,
    )

def oracle_affine(slope: float = 3.0, offset: float = 1.0) -> DiscreteCsoProblem:
    """Oracle A's sampling with the affine f(v) = slope * v + offset (antithetic differences vanish)."""
    return DiscreteCsoProblem(
        outer_values=[0.0, 1.0], outer_probs=[0.5, 0.5],
        inner_values=[[1.0, 3.0], [0.0, 2.0]], inner_probs=[[0.5, 0.5], [0.5, 0.5]],
        g=_linear_g, g_jac=_linear_g_jac,
        f=lambda xi, v: slope * v[0] + offset, f_grad=lambda xi, v: np.array([slope]),
    )

def oracle_b() -> DiscreteSquaredLossProblem:
    """xi uniform on {0, 1}; u(xi) = xi; eta | xi uniform on {xi, xi + 1}; g = x * eta."""
    return DiscreteSquaredLossProblem(
        outer_values=[0.0, 1.0], outer_probs=[0.5, 0.5],
        inner_values=[[0.0, 1.0], [1.0, 2.0]], inner_probs=[[0.5, 0.5], [0.5, 0.5]],
        g=_linear_g, g_jac=_linear_g_jac, u=lambda xi: xi,
    )

def degenerate_squared_loss(inner_value: float = 2.0) -> DiscreteSquaredLossProblem:
    """Squared-loss problem whose inner law is a point mass (no inner noise)."""
    return DiscreteSquaredLossProblem(
        outer_values=[0.0, 1.0], outer_probs=[0.5, 0.5],
        inner_values=[[inner_value], [inner_value]], inner_probs=[[1.0], [1.0]],
        g=_linear_g, g_jac=_linear_g_jac, u=lambda xi: xi,
    )
