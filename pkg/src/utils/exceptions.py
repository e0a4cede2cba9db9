# src/utils/exceptions.py

from typing import Any


class CsoError(Exception):
    """Base class for every error raised by the cso-mlmc package."""


class InvalidArgumentError(CsoError, ValueError):
    """A count, level, variance or interval argument violates its precondition."""


class DimensionMismatchError(InvalidArgumentError):
    """A parameter vector, inner value or batch has the wrong shape."""


class DivergentCostError(InvalidArgumentError):
    """The level distribution has infinite expected cost (tau <= 1)."""


class ConfigError(CsoError, ValueError):
    """
    A run configuration failed validation.

    Attributes:
        field (str | None): Dotted name of the offending field, e.g. 'estimator.M'.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class CannotFitError(CsoError, ValueError):
    """The decay regression cannot be fitted (too few levels or nonpositive moments)."""


class LevelOverflowError(CsoError, ArithmeticError):
    """A randomly drawn MLMC level exceeded the hard cap."""

    def __init__(self, level: int, l_hard: int):
        self.level = level
        self.l_hard = l_hard
        super().__init__(f"Drawn level {level} exceeds the hard cap {l_hard}")


class NonFiniteEstimateError(CsoError, ArithmeticError):
    """A gradient estimate contains NaN or Inf entries."""


class DivergenceError(CsoError, ArithmeticError):
    """
    The stochastic gradient iteration blew up.

    Attributes:
        iteration (int): Iteration at which the blow-up was detected.
        trace (Any): The RunTrace recorded up to that point.
    """

    def __init__(self, message: str, iteration: int, trace: Any = None):
        self.iteration = iteration
        self.trace = trace
        super().__init__(message)


class MissingArtifactError(CsoError, FileNotFoundError):
    """A file produced by an earlier command (e.g. trained parameters) is missing."""
