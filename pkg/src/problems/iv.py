# src/problems/iv.py

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..rng.streams import RngStream
from ..utils.exceptions import InvalidArgumentError
from .base import InnerBatch, OuterSample, SquaredLossProblem
from .mlp import Mlp

class GroundTruth(Enum):
    """Structural functions f used to generate Y."""
    SIN = "sin"
    IDENTITY = "identity"
    ABS = "abs"
    STEP = "step"

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self is GroundTruth.SIN:
            return np.sin(x)
        if self is GroundTruth.IDENTITY:
            return x.copy()
        if self is GroundTruth.ABS:
            return np.abs(x)
        # closed half-line: 1 at x = 0
        return np.where(x >= 0, 1.0, 0.0)

@dataclass(frozen=True)
class IvTriple:
    """One draw (X, Y, Z) of the data-generating process."""
    x: float
    y: float
    z1: float
    z2: float

@dataclass(frozen=True)
class IvOuter(OuterSample):
    """The outer variable of the IV problem: the response Y and the instrument Z."""
    y: float
    z1: float
    z2: float

@dataclass(frozen=True)
class IvDataProcess:
    """
    Y = f(X) + e + delta,  X = (Z1 + e)/2 + gamma,
    Z ~ U([z_low, z_high]^2),  e ~ N(0, var_e),  gamma, delta ~ N(0, var_gamma / var_delta).

    The noise parameters are variances.

    Attributes:
        truth (GroundTruth): The structural function f.
        var_e (float): Variance of the confounder e. Defaults to 1.
        var_gamma (float): Variance of gamma. Defaults to 0.1.
        var_delta (float): Variance of delta. Defaults to 0.1.
        z_low (float): Lower edge of the instrument box. Defaults to -3.
        z_high (float): Upper edge of the instrument box. Defaults to 3.
    """
    truth: GroundTruth = GroundTruth.SIN
    var_e: float = 1.0
    var_gamma: float = 0.1
    var_delta: float = 0.1
    z_low: float = -3.0
    z_high: float = 3.0

    def __post_init__(self):
        if isinstance(self.truth, str):
            object.__setattr__(self, 'truth', GroundTruth(self.truth))
        if min(self.var_e, self.var_gamma, self.var_delta) < 0:
            raise InvalidArgumentError("Noise variances must be nonnegative")
        if not self.z_low < self.z_high:
            raise InvalidArgumentError("z_low must be below z_high")

    def _noise(self, rng: RngStream, var: float, size=None):
        # a zero variance is allowed and means a noiseless term
        if var == 0:
            return np.zeros(size) if size is not None else 0.0
        return rng.normal(0.0, np.sqrt(var), size=size)

    def sample(self, rng: RngStream) -> IvTriple:
        """One (X, Y, Z) triple from the generating equations."""
        z1, z2 = rng.uniform(self.z_low, self.z_high, size=2)
        e = float(self._noise(rng, self.var_e))
        gamma = float(self._noise(rng, self.var_gamma))
        delta = float(self._noise(rng, self.var_delta))
        x = (z1 + e) / 2.0 + gamma
        y = float(self.truth(x)) + e + delta
        return IvTriple(float(x), float(y), float(z1), float(z2))

    def sample_many(self, rng: RngStream, n: int) -> dict[str, np.ndarray]:
        """n triples at once, as columns X, Y, Z1, Z2."""
        z = rng.uniform(self.z_low, self.z_high, size=(n, 2))
        e = self._noise(rng, self.var_e, size=n)
        gamma = self._noise(rng, self.var_gamma, size=n)
        delta = self._noise(rng, self.var_delta, size=n)
        x = (z[:, 0] + e) / 2.0 + gamma
        y = self.truth(x) + e + delta
        return {"X": x, "Y": y, "Z1": z[:, 0], "Z2": z[:, 1]}

    def sample_x_given_z(self, rng: RngStream, z1: float, m: int) -> np.ndarray:
        """m draws of X | Z with fresh (e', gamma'), independent of whatever produced Y."""
        e = self._noise(rng, self.var_e, size=m)
        gamma = self._noise(rng, self.var_gamma, size=m)
        return (z1 + e) / 2.0 + gamma

    def sample_x_given_z_many(self, rng: RngStream, z1: np.ndarray, m: int) -> np.ndarray:
        """X | Z for a column of instruments: shape (len(z1), m)."""
        z1 = np.asarray(z1, dtype=np.float64)
        shape = (z1.shape[0], m)
        e = self._noise(rng, self.var_e, size=shape)
        gamma = self._noise(rng, self.var_gamma, size=shape)
        return (z1[:, None] + e) / 2.0 + gamma

def iv_sample(process: IvDataProcess, rng: RngStream) -> IvTriple:
    return process.sample(rng)

class IvProblem(SquaredLossProblem):
    """
    IV regression as a squared-loss CSO problem:
    F(x) = E_{Y,Z}[(Y - E_{X|Z}[g_x(X)])^2] where g_x is an Mlp with weights x.
    """

    def __init__(self, process: IvDataProcess, net: Mlp):
        self.process = process
        self.net = net
        self.dim = net.n_params
        self.out_dim = 1
        self._require_scalar_output()

    def sample_outer(self, rng: RngStream) -> IvOuter:
        triple = self.process.sample(rng)
        return IvOuter(triple.y, triple.z1, triple.z2)

    def _draw_inner(self, rng: RngStream, outer: IvOuter, m: int) -> np.ndarray:
        return self.process.sample_x_given_z(rng, outer.z1, m)

    def u_eval(self, outer: IvOuter) -> float:
        return outer.y

    def g_eval(self, x, outer: IvOuter, inner) -> np.ndarray:
        x = self.check_param(x)
        return self.net.forward(x, [float(inner)])

    def g_grad(self, x, outer: IvOuter, inner) -> np.ndarray:
        x = self.check_param(x)
        return self.net.backward(x, [float(inner)])

    def g_batch(self, x, batch: InnerBatch) -> tuple[np.ndarray, np.ndarray]:
        x = self.check_param(x)
        values = self.net.forward(x, batch.samples)
        jacobians = self.net.backward(x, batch.samples)
        return values[:, None], jacobians[:, None, :]

    def near_kink(self, x, outer: IvOuter, inner, margin: float) -> bool:
        return self.net.min_abs_preactivation(x, [float(inner)]) < margin

def iv_problem(process: IvDataProcess, net: Mlp) -> IvProblem:
    """Wrap a data process and a network into the squared-loss interface."""
    return IvProblem(process, net)
