# src/rng/streams.py

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ..utils.exceptions import InvalidArgumentError, LevelOverflowError

MAX_PATH_LENGTH = 4
_U64 = 1 << 64
_LENGTH_SHIFT = 60

class StreamRole(IntEnum):
    """Last path element separating the independent consumers inside one run."""
    GRADIENT = 0
    OBJECTIVE = 1
    INIT = 2
    DIAGNOSTIC = 3
    DATA = 4

@dataclass(frozen=True)
class StreamKey:
    """
    Logical address of a random stream.

    Attributes:
        seed (int): 64-bit master seed.
        path (tuple[int, ...]): Up to four 64-bit indices, e.g. (replicate, role, eval_index).
    """
    seed: int
    path: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'path', tuple(int(i) for i in self.path))
        if not 0 <= int(self.seed) < _U64:
            raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if len(self.path) > MAX_PATH_LENGTH:
            raise InvalidArgumentError(f"Stream path too long: {len(self.path)} > {MAX_PATH_LENGTH}")
        for index in self.path:
            if not 0 <= index < _U64:
                raise InvalidArgumentError(f"Stream path index out of 64-bit range: {index}")

    def child(self, *indices: int) -> 'StreamKey':
        """Return the key with indices appended to the path."""
        return StreamKey(self.seed, self.path + tuple(indices))

class RngStream:
    """
    Single-owner random stream on a Philox counter-based bit generator.

    The (seed, path) of the StreamKey is mapped onto the Philox key and the
    high counter words, so sibling streams never overlap and construction
    needs no jumping. Streams must not be shared between threads; derive one
    per task instead.
    """

    def __init__(self, key: StreamKey):
        self.key = key
        padded = key.path + (0,) * (MAX_PATH_LENGTH - len(key.path))
        philox_key = np.array([key.seed, padded[0]], dtype=np.uint64)
        counter = np.array([len(key.path) << _LENGTH_SHIFT, padded[1], padded[2], padded[3]], dtype=np.uint64)
        self._generator = np.random.Generator(np.random.Philox(key=philox_key, counter=counter))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def clone(self) -> 'RngStream':
        """Copy of this stream at its current position; both produce identical draws afterwards."""
        twin = RngStream.__new__(RngStream)
        twin.key = self.key
        bit_generator = np.random.Philox()
        bit_generator.state = self._generator.bit_generator.state
        twin._generator = np.random.Generator(bit_generator)
        return twin

    def random(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._generator.random(size)

    def open_unit(self, size=None):
        """Uniform draws on (0, 1]."""
        return 1.0 - self._generator.random(size)

    def uniform(self, lo: float, hi: float, size=None):
        if not lo < hi:
            raise InvalidArgumentError(f"uniform requires lo < hi, got lo={lo}, hi={hi}")
        return self._generator.uniform(lo, hi, size)

    def normal(self, mean=0.0, sd=1.0, size=None):
        if np.any(np.asarray(sd) <= 0):
            raise InvalidArgumentError(f"normal requires sd > 0, got {sd}")
        return self._generator.normal(mean, sd, size)

    def categorical(self, probs, size=None):
        """Indices drawn from a finite distribution by inversion of the cumulative weights."""
        cumulative = np.cumsum(np.asarray(probs, dtype=np.float64))
        u = self._generator.random(size) * cumulative[-1]
        return np.searchsorted(cumulative, u, side='right')

    def __repr__(self):
        return f"RngStream(seed={self.key.seed}, path={self.key.path})"

def derive(key: StreamKey) -> RngStream:
    """
    Build the stream addressed by key. Pure: the same key gives the same draws.

    Args:
        key (StreamKey): Seed and path.

    Returns:
        RngStream: A fresh stream positioned at its first draw.
    """
    return RngStream(key)

def stream(seed: int, *path: int) -> RngStream:
    """Shorthand for derive(StreamKey(seed, path))."""
    return derive(StreamKey(seed, tuple(path)))

def normal(rng: RngStream, mean: float, sd: float) -> float:
    """One normal deviate with the given mean and standard deviation."""
    return float(rng.normal(mean, sd))

def uniform(rng: RngStream, lo: float, hi: float) -> float:
    """One uniform deviate on [lo, hi)."""
    return float(rng.uniform(lo, hi))

def geometric_level(rng: RngStream, dist) -> int:
    """
    Draw a level with P(level = l) = (1 - 2^-tau) 2^(-tau l) by inversion.

    Args:
        rng (RngStream): Stream to draw from.
        dist: Object with attributes tau and l_hard (a LevelDistribution).

    Returns:
        int: The level.

    Raises:
        LevelOverflowError: If the drawn level exceeds dist.l_hard.
    """
    u = float(rng.open_unit())
    level = int(np.floor(np.log(u) / (-dist.tau * np.log(2.0))))
    if level > dist.l_hard:
        raise LevelOverflowError(level, dist.l_hard)
    return level
