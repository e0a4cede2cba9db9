# tests/tests_rng/test_streams.py

import numpy as np
import pytest
from scipy import stats

from src.estimators import LevelDistribution
from src.rng import StreamKey, StreamRole, derive, geometric_level, normal, stream, uniform
from src.utils.exceptions import InvalidArgumentError, LevelOverflowError

def test_derive_is_pure():
    """Deriving the same key twice gives identical draws."""
    key = StreamKey(42, (3, StreamRole.GRADIENT))
    first = derive(key).random(1000)
    second = derive(key).random(1000)
    np.testing.assert_array_equal(first, second)

def test_clone_reproduces_remaining_draws():
    """A clone taken mid-stream continues with the same values as the original."""
    original = stream(7, 1)
    original.random(17)
    twin = original.clone()
    np.testing.assert_array_equal(original.normal(0.0, 1.0, size=50), twin.normal(0.0, 1.0, size=50))

def test_distinct_paths_give_distinct_streams():
    """Paths differing only in length or one index do not share draws."""
    draws = [stream(5).random(8), stream(5, 0).random(8), stream(5, 0, 0).random(8), stream(5, 0, 1).random(8),
             stream(6, 0, 1).random(8)]
    for i in range(len(draws)):
        for j in range(i + 1, len(draws)):
            assert not np.array_equal(draws[i], draws[j])

def test_sibling_streams_uncorrelated():
    """Sibling keys produce uniforms with empirical correlation below 0.01."""
    a = stream(11, 0, 1).random(100_000)
    b = stream(11, 0, 2).random(100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01

def test_uniform_chi_square():
    """Ten equal buckets of 10^5 uniforms pass a chi-square test at p > 0.001."""
    counts, _ = np.histogram(stream(3, 9).random(100_000), bins=10, range=(0.0, 1.0))
    assert stats.chisquare(counts).pvalue > 0.001

def test_normal_moments():
    """Mean and variance of 10^6 normals lie within 4 standard errors."""
    n = 1_000_000
    draws = stream(8, 2).normal(1.5, 2.0, size=n)
    assert abs(draws.mean() - 1.5) < 4 * 2.0 / np.sqrt(n)
    # Var of the sample variance of a normal is 2 sigma^4 / n
    assert abs(draws.var() - 4.0) < 4 * np.sqrt(2 * 16.0 / n)

def test_scalar_helpers():
    """normal() and uniform() return plain floats within range."""
    rng = stream(1, 1)
    assert isinstance(normal(rng, 0.0, 1.0), float)
    values = [uniform(rng, -3.0, 3.0) for _ in range(10_000)]
    assert min(values) >= -3.0 and max(values) < 3.0

def test_uniform_range_respected():
    """Vectorized uniform draws stay in [lo, hi)."""
    values = stream(2, 4).uniform(-3.0, 3.0, size=100_000)
    assert values.min() >= -3.0 and values.max() < 3.0

def test_open_unit_excludes_zero():
    """open_unit draws lie in (0, 1]."""
    values = stream(2, 5).open_unit(100_000)
    assert values.min() > 0.0 and values.max() <= 1.0

@pytest.mark.parametrize("kwargs", [{"mean": 0.0, "sd": 0.0}, {"mean": 0.0, "sd": -1.0}])
def test_normal_rejects_nonpositive_sd(kwargs):
    """sd <= 0 is an invalid argument."""
    with pytest.raises(InvalidArgumentError):
        stream(1).normal(**kwargs)

def test_uniform_rejects_empty_interval():
    """lo >= hi is an invalid argument."""
    with pytest.raises(InvalidArgumentError):
        stream(1).uniform(1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        uniform(stream(1), 2.0, 1.0)

def test_key_validation():
    """Paths longer than four entries and out-of-range values are rejected."""
    with pytest.raises(InvalidArgumentError):
        StreamKey(1, (0, 1, 2, 3, 4))
    with pytest.raises(InvalidArgumentError):
        StreamKey(-1)
    with pytest.raises(InvalidArgumentError):
        StreamKey(1, (2 ** 64,))
    assert StreamKey(1, (2,)).child(3, 4).path == (2, 3, 4)

def test_geometric_level_frequencies():
    """Frequencies of levels 0..5 match omega_l within 4 standard errors."""
    dist = LevelDistribution(tau=1.5)
    rng = stream(13, 3)
    n = 200_000
    levels = np.array([geometric_level(rng, dist) for _ in range(n)])
    for level in range(6):
        p = dist.weight(level)
        freq = np.mean(levels == level)
        assert abs(freq - p) < 4 * np.sqrt(p * (1 - p) / n), level

def test_geometric_level_overflow():
    """A level above the hard cap raises instead of being truncated."""
    dist = LevelDistribution(tau=1.5, l_hard=0)
    rng = stream(4, 4)
    with pytest.raises(LevelOverflowError) as excinfo:
        for _ in range(500):
            geometric_level(rng, dist)
    assert excinfo.value.l_hard == 0
    assert excinfo.value.level >= 1

def test_categorical_inversion():
    """Categorical draws follow the given weights."""
    draws = stream(21, 0).categorical([0.2, 0.3, 0.5], size=100_000)
    freqs = np.bincount(draws, minlength=3) / draws.size
    np.testing.assert_allclose(freqs, [0.2, 0.3, 0.5], atol=4 * np.sqrt(0.25 / draws.size))
