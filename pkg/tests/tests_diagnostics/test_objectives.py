# tests/tests_diagnostics/test_objectives.py

import numpy as np
import pytest

from src.diagnostics import exact_objective, iv_noise_floor, objective_for, objective_iv, objective_mc_logistic
from src.problems import GroundTruth, IvDataProcess, IvProblem, Mlp
from src.rng import stream
from src.utils.exceptions import InvalidArgumentError

def test_logistic_objective_at_origin(logistic_model):
    """Every term is log(1 + e^0) at x = 0."""
    value = objective_mc_logistic(logistic_model, np.zeros(10), 1000, stream(1, 1))
    assert value == pytest.approx(np.log(2.0), abs=1e-12)

def test_logistic_objective_improves_along_truth(logistic_model):
    """Moving toward x* lowers the objective below log 2."""
    x = 0.1 * np.arange(1, 11) / np.linalg.norm(np.arange(1, 11))
    assert objective_mc_logistic(logistic_model, x, 20_000, stream(2, 1)) < np.log(2.0)

def test_noise_floor_identity_truth():
    """For f(x) = x, Var(Y | Z) = 2.25 var_e + var_gamma + var_delta = 2.45."""
    assert iv_noise_floor(IvDataProcess(GroundTruth.IDENTITY)) == pytest.approx(2.45, abs=1e-10)

def test_noise_floor_noiseless():
    """No noise, no floor."""
    process = IvDataProcess(GroundTruth.SIN, var_e=0.0, var_gamma=0.0, var_delta=0.0)
    assert iv_noise_floor(process) == pytest.approx(0.0, abs=1e-12)

def test_noise_floor_sin_exceeds_delta():
    """The floor of a nonlinear truth is at least the additive noise."""
    assert iv_noise_floor(IvDataProcess()) > 0.1

def test_perfect_predictor_reaches_floor():
    """The identity network on identity data attains the noise floor."""
    process = IvDataProcess(GroundTruth.IDENTITY)
    problem = IvProblem(process, Mlp((1, 1)))
    value = objective_iv(problem, np.array([1.0, 0.0]), 200_000, 2, stream(3, 1))
    assert value == pytest.approx(iv_noise_floor(process), abs=0.05)

def test_iv_objective_needs_two_inner_draws(iv_problem_sin):
    """The variance correction needs m >= 2."""
    with pytest.raises(InvalidArgumentError):
        objective_iv(iv_problem_sin, np.zeros(iv_problem_sin.dim), 10, 1, stream(4, 1))

def test_exact_objective(problem_a):
    """Enumeration gives 2.5 x^2 on oracle A."""
    assert exact_objective(problem_a, [2.0]) == pytest.approx(10.0)

def test_objective_dispatch(problem_a, problem_b, logistic_model, iv_problem_sin):
    """Each problem type gets an evaluator; unknown types are refused."""
    assert objective_for(problem_a)(np.array([1.0]), stream(5, 1)) == pytest.approx(2.5)
    assert objective_for(logistic_model, n_hat=10)(np.zeros(10), stream(5, 1)) == pytest.approx(np.log(2.0))
    assert np.isfinite(objective_for(iv_problem_sin, n=50)(np.zeros(iv_problem_sin.dim), stream(5, 1)))
    assert np.isfinite(objective_for(problem_b)(np.array([1.0]), stream(5, 1)))
    with pytest.raises(InvalidArgumentError):
        objective_for(object())
