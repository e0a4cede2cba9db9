# conftest.py

import itertools
import os
import tempfile

# keep test logs out of the working tree; must precede the first src import
os.environ.setdefault("CSO_MLMC_LOG_DIR", os.path.join(tempfile.gettempdir(), "cso_mlmc_test_logs"))

import numpy as np
import pytest

from src.problems import (
    InnerBatch,
    IvDataProcess,
    IvProblem,
    LogisticInvariantModel,
    Mlp,
    degenerate_squared_loss,
    oracle_a,
    oracle_affine,
    oracle_b,
)
from src.rng import stream
from src.utils.config_loader import ConfigLoader

class CountingProblem:
    """
    Proxy counting the inner evaluations a problem performs through g_batch.

    Everything else is forwarded, so estimators see the wrapped problem unchanged.
    """

    def __init__(self, inner):
        self._inner = inner
        self.evaluations = 0

    def g_batch(self, x, batch):
        self.evaluations += len(batch)
        return self._inner.g_batch(x, batch)

    def __getattr__(self, name):
        return getattr(self._inner, name)

@pytest.fixture
def problem_a():  # grad F(x) = 5x
    return oracle_a()

@pytest.fixture
def problem_b():  # squared loss, u = xi
    return oracle_b()

@pytest.fixture
def affine_problem():  # f(v) = 3v + 1
    return oracle_affine()

@pytest.fixture
def degenerate_problem():  # point-mass inner law
    return degenerate_squared_loss()

@pytest.fixture
def logistic_model():
    return LogisticInvariantModel()

@pytest.fixture
def small_net():
    return Mlp((1, 8, 8, 1))

@pytest.fixture
def iv_problem_sin(small_net):
    return IvProblem(IvDataProcess(), small_net)

@pytest.fixture
def rng():
    return stream(20240601, 0)

@pytest.fixture
def logistic_point():
    """x ~ N(0, 1e-4 I_10) on a fixed seed."""
    return stream(99, 1).normal(0.0, 0.01, size=10)

@pytest.fixture
def counting():
    return CountingProblem

@pytest.fixture
def make_config(tmp_path):
    """Build a validated RunConfig writing into tmp_path from a nested or dotted mapping."""
    def _make(mapping=None):
        merged = {"output.dir": str(tmp_path / "out")}
        merged.update(mapping or {})
        return ConfigLoader.from_mapping(merged)
    return _make

def enumerate_batches(problem, outer, m):
    """Every inner batch of length m for a finite-support problem, with its probability."""
    support = problem.inner_support(outer)
    for combo in itertools.product(support, repeat=m):
        yield InnerBatch(outer, [eta for eta, _ in combo]), float(np.prod([p for _, p in combo]))

@pytest.fixture
def batches():
    return enumerate_batches
