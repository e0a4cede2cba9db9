# tests/tests_estimators/test_squared_loss.py

import numpy as np
import pytest

from src.estimators import (
    estimator_1_kernel,
    estimator_2_kernel,
    estimator_3_kernel,
    grad_estimator_1,
    grad_estimator_2,
    grad_estimator_3,
    objective_biased,
    objective_biased_kernel,
    objective_unbiased,
    objective_unbiased_kernel,
    u_eval,
)
from src.rng import stream
from src.utils.exceptions import InvalidArgumentError

POINTS = [np.array([1.0]), np.array([0.3]), np.array([-2.0])]

def _two_batch_mean(kernel, problem, x, M, batches):
    mean = 0.0
    for outer, p_outer in problem.outer_support():
        for batch_a, p_a in batches(problem, outer, M):
            for batch_b, p_b in batches(problem, outer, M):
                mean += p_outer * p_a * p_b * kernel(problem, x, outer, batch_a, batch_b)[0]
    return mean

def _one_batch_mean(kernel, problem, x, M, batches):
    mean = 0.0
    for outer, p_outer in problem.outer_support():
        for batch, p_batch in batches(problem, outer, M):
            value = kernel(problem, x, outer, batch)
            mean += p_outer * p_batch * float(np.asarray(value).ravel()[0])
    return mean

@pytest.mark.parametrize("x", POINTS)
@pytest.mark.parametrize("M", [1, 2])
@pytest.mark.parametrize("kernel", [estimator_1_kernel, estimator_2_kernel])
def test_two_batch_estimators_unbiased(problem_b, batches, kernel, M, x):
    """Estimators 1 and 2 average exactly to grad F = 2.5x - 1.5 over every inner sequence."""
    assert _two_batch_mean(kernel, problem_b, x, M, batches) == pytest.approx(2.5 * x[0] - 1.5, abs=1e-12)

@pytest.mark.parametrize("x", POINTS)
@pytest.mark.parametrize("M", [2, 3, 4])
def test_estimator_3_unbiased(problem_b, batches, M, x):
    """Estimator 3 averages exactly to grad F over every inner sequence of length M."""
    assert _one_batch_mean(estimator_3_kernel, problem_b, x, M, batches) == pytest.approx(
        problem_b.exact_gradient(x)[0], abs=1e-12)

@pytest.mark.parametrize("x", POINTS)
@pytest.mark.parametrize("M", [2, 3])
def test_corrected_objective_unbiased(problem_b, batches, M, x):
    """The bias-corrected objective averages exactly to F(x)."""
    assert _one_batch_mean(objective_unbiased_kernel, problem_b, x, M, batches) == pytest.approx(
        problem_b.exact_objective(x), abs=1e-12)

@pytest.mark.parametrize("M", [1, 2, 4])
def test_plug_in_objective_bias(problem_b, batches, M):
    """The plug-in objective overshoots F(x) by Var(g | xi) / M = 0.25 x^2 / M."""
    x = np.array([1.0])
    assert _one_batch_mean(objective_biased_kernel, problem_b, x, M, batches) == pytest.approx(0.25 + 0.25 / M, abs=1e-12)

def test_estimator_3_reproduces_estimator_2_on_concatenated_batches(iv_problem_sin):
    """Estimator 3 at M = 2 on a.concat(b) equals estimator 2 at M = 1 on (a, b); the network batches differ in shape, so up to rounding."""
    rng = stream(31, 0)
    x = iv_problem_sin.net.init_params(rng)
    for _ in range(10_000):
        outer = iv_problem_sin.sample_outer(rng)
        batch_a = iv_problem_sin.sample_inner(rng, outer, 1)
        batch_b = iv_problem_sin.sample_inner(rng, outer, 1)
        np.testing.assert_allclose(
            estimator_3_kernel(iv_problem_sin, x, outer, batch_a.concat(batch_b)),
            estimator_2_kernel(iv_problem_sin, x, outer, batch_a, batch_b),
            rtol=1e-12, atol=1e-14,
        )

def test_estimator_3_matches_estimator_2_under_cloned_streams(problem_b):
    """On a discrete problem the inner draws line up, so the full estimators coincide."""
    rng = stream(32, 0)
    for _ in range(200):
        clone = rng.clone()
        three = grad_estimator_3(problem_b, np.array([0.7]), 2, 5, rng)
        two = grad_estimator_2(problem_b, np.array([0.7]), 1, 5, clone)
        np.testing.assert_array_equal(three.value, two.value)

@pytest.mark.parametrize("estimator, M, N, expected", [
    (grad_estimator_1, 3, 2, 12),
    (grad_estimator_2, 3, 2, 12),
    (grad_estimator_3, 3, 2, 6),
])
def test_costs(problem_b, counting, estimator, M, N, expected):
    """Estimators 1 and 2 cost 2MN, estimator 3 costs MN."""
    problem = counting(problem_b)
    estimate = estimator(problem, np.array([1.0]), M, N, stream(33, 0))
    assert estimate.cost == expected == problem.evaluations

def test_estimator_3_needs_two_draws(problem_b):
    """M < 2 leaves the variance correction undefined."""
    with pytest.raises(InvalidArgumentError):
        grad_estimator_3(problem_b, np.array([1.0]), 1, 4, stream(34, 0))
    with pytest.raises(InvalidArgumentError):
        objective_unbiased(problem_b, np.array([1.0]), 1, 4, stream(34, 0))

def test_degenerate_inner_law_gives_exact_gradient(degenerate_problem, rng):
    """With a point-mass inner law every estimator returns the same value for the same outer draw."""
    x = np.array([0.5])
    outer = degenerate_problem.sample_outer(rng)
    batch = degenerate_problem.sample_inner(rng, outer, 2)
    single_a, single_b = batch.halves()
    three = estimator_3_kernel(degenerate_problem, x, outer, batch)
    np.testing.assert_allclose(estimator_1_kernel(degenerate_problem, x, outer, single_a, single_b), three, atol=1e-14)
    np.testing.assert_allclose(estimator_2_kernel(degenerate_problem, x, outer, single_a, single_b), three, atol=1e-14)
    assert objective_unbiased_kernel(degenerate_problem, x, outer, batch) == pytest.approx(
        objective_biased_kernel(degenerate_problem, x, outer, batch))

def test_objective_estimators_statistically(problem_b):
    """Sampled F* and F-hat at x = 1 land on 0.25 and 0.25 + 0.25 / M."""
    x = np.array([1.0])
    unbiased = objective_unbiased(problem_b, x, 2, 100_000, stream(35, 0))
    biased = objective_biased(problem_b, x, 2, 100_000, stream(35, 1))
    assert unbiased == pytest.approx(0.25, abs=0.01)
    assert biased == pytest.approx(0.375, abs=0.01)

def test_u_eval_reads_target(problem_b):
    """u is the outer value for oracle B."""
    outer, _ = problem_b.outer_support()[1]
    assert u_eval(problem_b, outer) == 1.0
