# src/problems/logistic.py

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..rng.streams import RngStream
from ..utils.exceptions import InvalidArgumentError
from .base import CsoProblem, InnerBatch, OuterSample

def softplus(t):
    """log(1 + exp(t)) evaluated as max(t, 0) + log1p(exp(-|t|))."""
    t = np.asarray(t, dtype=np.float64)
    return np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))

@dataclass(frozen=True, eq=False)
class LogisticOuter(OuterSample):
    """Feature vector a and label b in {-1, +1}."""
    a: np.ndarray
    b: float

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64)
        a.setflags(write=False)
        object.__setattr__(self, 'a', a)

class LogisticInvariantModel(CsoProblem):
    """
    Invariant logistic regression:
    F(x) = E_{(a,b)}[ log(1 + exp(-b E[eta | a]^T x)) ] with eta | a ~ N(a, sigma_eta^2 I).

    Labels come from a fixed direction x_star: b = +1 if a^T x_star > 0, else -1.

    Args:
        d (int): Dimension. Defaults to 10.
        sigma_xi2 (float): Variance of the features a. Defaults to 1.
        sigma_eta2 (float): Variance of the perturbation eta - a. Defaults to 1.
        x_star (array-like | None): Labeling vector. Defaults to (1, 2, ..., d).
    """

    out_dim = 1

    def __init__(self, d: int = 10, sigma_xi2: float = 1.0, sigma_eta2: float = 1.0, x_star=None):
        if d < 1:
            raise InvalidArgumentError(f"d must be positive, got {d}")
        if sigma_xi2 <= 0 or sigma_eta2 <= 0:
            raise InvalidArgumentError("sigma_xi2 and sigma_eta2 must be positive")
        x_star = np.arange(1, d + 1, dtype=np.float64) if x_star is None else np.asarray(x_star, dtype=np.float64)
        if x_star.shape != (d,) or not np.any(x_star):
            raise InvalidArgumentError("x_star must be a non-zero vector of length d")
        x_star.setflags(write=False)
        self.dim = d
        self.sigma_xi2 = float(sigma_xi2)
        self.sigma_eta2 = float(sigma_eta2)
        self.x_star = x_star

    def label(self, a: np.ndarray) -> float:
        """+1 when a^T x_star > 0, otherwise -1 (including the tie at exactly 0)."""
        return 1.0 if float(a @ self.x_star) > 0 else -1.0

    def sample_outer(self, rng: RngStream) -> LogisticOuter:
        a = rng.normal(0.0, np.sqrt(self.sigma_xi2), size=self.dim)
        return LogisticOuter(a, self.label(a))

    def sample_outer_many(self, rng: RngStream, n: int) -> tuple[np.ndarray, np.ndarray]:
        """n outer draws at once: features (n, d) and labels (n,)."""
        a = rng.normal(0.0, np.sqrt(self.sigma_xi2), size=(n, self.dim))
        b = np.where(a @ self.x_star > 0, 1.0, -1.0)
        return a, b

    def _draw_inner(self, rng: RngStream, outer: LogisticOuter, m: int) -> np.ndarray:
        return outer.a + rng.normal(0.0, np.sqrt(self.sigma_eta2), size=(m, self.dim))

    def g_eval(self, x, outer: LogisticOuter, inner) -> np.ndarray:
        x = self.check_param(x)
        return np.array([float(np.asarray(inner) @ x)])

    def g_grad(self, x, outer: LogisticOuter, inner) -> np.ndarray:
        self.check_param(x)
        return np.asarray(inner, dtype=np.float64).reshape(1, self.dim).copy()

    def g_batch(self, x, batch: InnerBatch) -> tuple[np.ndarray, np.ndarray]:
        x = self.check_param(x)
        etas = batch.samples
        return (etas @ x)[:, None], etas[:, None, :].copy()

    def f_eval(self, outer: LogisticOuter, v) -> float:
        v = self.check_value(v)
        return float(softplus(-outer.b * v[0]))

    def f_grad(self, outer: LogisticOuter, v) -> np.ndarray:
        v = self.check_value(v)
        return np.array([-outer.b * float(expit(-outer.b * v[0]))])

def logistic_outer(model: LogisticInvariantModel, rng: RngStream) -> tuple[np.ndarray, float]:
    """One (a, b) draw: a ~ N(0, sigma_xi^2 I_d), b = +1 if a^T x_star > 0 else -1."""
    outer = model.sample_outer(rng)
    return outer.a, outer.b

def logistic_inner(model: LogisticInvariantModel, outer: LogisticOuter, m: int, rng: RngStream) -> InnerBatch:
    """m draws of eta ~ N(a, sigma_eta^2 I_d)."""
    return model.sample_inner(rng, outer, m)
