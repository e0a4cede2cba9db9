# tests/tests_experiments/test_builders.py

import numpy as np
import pytest

from src.experiments import build_estimator, build_problem, build_schedule, estimator_label, initial_point
from src.optim import NestedMcConfig, SquaredLossConfig, StepKind, UnbiasedMlmcConfig
from src.problems import DiscreteSquaredLossProblem, IvProblem, LogisticInvariantModel
from src.utils.exceptions import ConfigError

def test_build_problem_kinds(make_config):
    """Each configured kind maps to its problem; kind= overrides the config."""
    config = make_config({"problem.kind": "iv", "problem.layers": [1, 4, 1]})
    problem = build_problem(config.problem)
    assert isinstance(problem, IvProblem) and problem.dim == 13
    assert isinstance(build_problem(config.problem, kind="logistic"), LogisticInvariantModel)
    assert isinstance(build_problem(config.problem, kind="oracle_b"), DiscreteSquaredLossProblem)

def test_build_estimators_and_labels(make_config):
    """Estimator settings become configs with stable directory labels."""
    config = make_config({
        "problem.kind": "oracle_b",
        "estimators": [{"kind": "mlmc"}, {"kind": "nested_mc", "M": 8}, {"kind": "squared_loss", "M": 2},
                       {"kind": "fixed_mlmc", "counts": [4, 2, 1]}, {"kind": "exact", "label": "truth"}],
    })
    configs = [build_estimator(s) for s in config.estimators]
    assert isinstance(configs[0], UnbiasedMlmcConfig) and configs[0].dist.tau == 1.5
    assert isinstance(configs[1], NestedMcConfig) and configs[1].M == 8
    assert isinstance(configs[2], SquaredLossConfig) and configs[2].variant == 3
    assert configs[3].cost_per_iteration == 12
    assert [estimator_label(s) for s in config.estimators] == [
        "mlmc_tau1.5_N1", "nested_mc_M8_N1", "squared_loss3_M2_N1", "fixed_mlmc_4-2-1", "truth"]

def test_build_schedule(make_config):
    """The step kind is parsed from its name."""
    schedule = build_schedule(make_config({"sgd.kind": "inverse_t", "sgd.gamma0": 0.5}).sgd)
    assert schedule.kind is StepKind.INVERSE_T and schedule.gamma(1) == 0.25

def test_initial_point_is_shared_per_replicate(make_config):
    """Replicate r always starts from the same draw; different replicates differ."""
    settings = make_config().problem
    problem = build_problem(settings)
    first = initial_point(problem, settings, 0)
    np.testing.assert_array_equal(first, initial_point(problem, settings, 0))
    assert not np.array_equal(first, initial_point(problem, settings, 1))
    assert np.std(first) < 0.1

def test_initial_point_explicit(make_config):
    """An explicit x0 wins and must match the dimension."""
    settings = make_config({"problem.kind": "oracle_a", "problem.x0": [2.0]}).problem
    np.testing.assert_array_equal(initial_point(build_problem(settings), settings), [2.0])
    settings = make_config({"problem.kind": "oracle_a", "problem.x0": [2.0, 1.0]}).problem
    with pytest.raises(ConfigError):
        initial_point(build_problem(settings), settings)
