# src/problems/base.py

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ..rng.streams import RngStream
from ..utils.exceptions import DimensionMismatchError, InvalidArgumentError
from ..utils.general_utility import as_param_vector, check_vector, require_count

@dataclass(frozen=True)
class OuterSample:
    """Base class for one draw of the outer variable xi. Problems subclass it with their payload."""

@dataclass(frozen=True, eq=False)
class InnerBatch:
    """
    Conditionally i.i.d. draws of eta given one outer sample, in draw order.

    Attributes:
        outer (OuterSample): The outer draw the batch is conditioned on.
        samples (np.ndarray): Array whose first axis indexes the draws.
    """
    outer: OuterSample
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim == 0:
            samples = samples.reshape(1)
        if samples.shape[0] < 1:
            raise InvalidArgumentError("An inner batch needs at least one sample")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def __getitem__(self, index):
        return self.samples[index]

    def halves(self) -> tuple['InnerBatch', 'InnerBatch']:
        """Split into (a) = first half and (b) = second half of the draws."""
        m = len(self)
        if m % 2:
            raise InvalidArgumentError(f"Cannot halve a batch of odd length {m}")
        return InnerBatch(self.outer, self.samples[: m // 2]), InnerBatch(self.outer, self.samples[m // 2:])

    def concat(self, other: 'InnerBatch') -> 'InnerBatch':
        """Batch holding this batch's draws followed by other's."""
        return InnerBatch(self.outer, np.concatenate([self.samples, other.samples], axis=0))

class CsoProblem(ABC):
    """
    A conditional stochastic optimization problem
    F(x) = E_xi[ f_xi( E_{eta|xi}[ g_eta(x, xi) ] ) ].

    Subclasses supply outer and inner sampling plus the four evaluation maps.
    Problems are immutable after construction and can be shared between
    threads; all randomness comes from the RngStream passed in.

    Attributes:
        dim (int): Dimension d of the decision variable.
        out_dim (int): Dimension k of g's output.
    """

    dim: int
    out_dim: int

    @abstractmethod
    def sample_outer(self, rng: RngStream) -> OuterSample:
        """Draw one xi from the outer law."""

    @abstractmethod
    def _draw_inner(self, rng: RngStream, outer: OuterSample, m: int) -> np.ndarray:
        """Draw m conditionally i.i.d. inner payloads given outer (first axis = draw)."""

    def sample_inner(self, rng: RngStream, outer: OuterSample, m: int) -> InnerBatch:
        """
        Draw m conditionally i.i.d. copies of eta given outer.

        Args:
            rng (RngStream): Stream to draw from.
            outer (OuterSample): The conditioning outer draw.
            m (int): Batch length, at least 1.

        Returns:
            InnerBatch: The draws in draw order.

        Raises:
            InvalidArgumentError: If m < 1.
        """
        m = require_count(m, "m")
        return InnerBatch(outer, self._draw_inner(rng, outer, m))

    @abstractmethod
    def g_eval(self, x: np.ndarray, outer: OuterSample, inner) -> np.ndarray:
        """g_eta(x, xi) as a vector in R^k."""

    @abstractmethod
    def g_grad(self, x: np.ndarray, outer: OuterSample, inner) -> np.ndarray:
        """Jacobian of g in x, shape (k, d); row i is the gradient of component i."""

    @abstractmethod
    def f_eval(self, outer: OuterSample, v: np.ndarray) -> float:
        """f_xi(v) for v in R^k."""

    @abstractmethod
    def f_grad(self, outer: OuterSample, v: np.ndarray) -> np.ndarray:
        """Gradient of f_xi at v, a vector in R^k."""

    def g_batch(self, x: np.ndarray, batch: InnerBatch) -> tuple[np.ndarray, np.ndarray]:
        """
        Evaluate g and its Jacobian for every draw of a batch.

        This is the only entry point estimators use, so one call costs len(batch)
        fused g / grad-g evaluations. Subclasses override it with vectorized code.

        Args:
            x (np.ndarray): Decision variable.
            batch (InnerBatch): Inner draws.

        Returns:
            tuple[np.ndarray, np.ndarray]: values of shape (m, k) and Jacobians of shape (m, k, d).
        """
        values = np.stack([self.g_eval(x, batch.outer, inner) for inner in batch.samples])
        jacobians = np.stack([self.g_grad(x, batch.outer, inner) for inner in batch.samples])
        return values, jacobians

    def check_param(self, x) -> np.ndarray:
        """Validate x against the declared dimension (finite entries, shape (d,))."""
        return as_param_vector(x, self.dim)

    def check_value(self, v) -> np.ndarray:
        """Validate an element of R^k."""
        return check_vector(v, self.out_dim, "v")

    def near_kink(self, x: np.ndarray, outer: OuterSample, inner, margin: float) -> bool:
        """True when finite differences at this point would straddle a non-smooth point of g."""
        return False

class SquaredLossProblem(CsoProblem):
    """
    The special case F(x) = E_xi[(u(xi) - E_{eta|xi}[g_eta(x, xi)])^2] with scalar g.

    f is fixed to the squared error against the observable u, so subclasses
    only provide u_eval plus sampling and g.
    """

    out_dim = 1

    def _require_scalar_output(self):
        if self.out_dim != 1:
            raise DimensionMismatchError(f"Squared-loss problems need k = 1, got k = {self.out_dim}")

    @abstractmethod
    def u_eval(self, outer: OuterSample) -> float:
        """The observable u(xi)."""

    def f_eval(self, outer: OuterSample, v) -> float:
        v = self.check_value(v)
        residual = self.u_eval(outer) - v[0]
        return float(residual * residual)

    def f_grad(self, outer: OuterSample, v) -> np.ndarray:
        v = self.check_value(v)
        return np.array([-2.0 * (self.u_eval(outer) - v[0])])
