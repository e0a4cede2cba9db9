# tests/tests_diagnostics/test_decay.py

import numpy as np
import pytest

from src.diagnostics import LevelMoment, decay_fit_from_rows, estimate_decay, fit_beta, level_moments
from src.rng import stream
from src.utils.exceptions import CannotFitError, InvalidArgumentError

def _row(level, moment):
    return LevelMoment(level, moment, 0.0, 1.0, 0.0, 0.0, float(2 ** level), 10)

def test_fit_recovers_synthetic_rate():
    """Moments 3 * 2^(-2l) give beta = 2 and c2 = 3."""
    rows = [_row(level, 3.0 * 2.0 ** (-2 * level)) for level in range(9)]
    beta, intercept = fit_beta(rows, (1, 8))
    assert beta == pytest.approx(2.0, abs=1e-12)
    assert intercept == pytest.approx(np.log2(3.0), abs=1e-12)
    fit = decay_fit_from_rows(rows, (1, 8))
    assert fit.c2 == pytest.approx(3.0) and fit.slope == pytest.approx(-2.0)
    assert len(fit.rows) == 9

def test_fit_uses_only_levels_in_range():
    """Rows outside the fit range do not move the line."""
    rows = [_row(0, 1e6)] + [_row(level, 2.0 ** (-level)) for level in range(1, 5)]
    assert fit_beta(rows, (1, 4))[0] == pytest.approx(1.0, abs=1e-12)

def test_fit_needs_two_levels():
    """A single level in range cannot be fitted."""
    with pytest.raises(CannotFitError):
        fit_beta([_row(1, 0.5), _row(5, 0.1)], (1, 3))

def test_fit_rejects_zero_moments():
    """log2 of a zero moment is undefined."""
    with pytest.raises(CannotFitError):
        fit_beta([_row(1, 0.5), _row(2, 0.0)], (1, 2))

def test_affine_problem_has_zero_moments(affine_problem):
    """With affine f every Delta psi_l (l >= 1) vanishes, so the fit is refused."""
    rows = level_moments(affine_problem, [0.5], [1, 2, 3], 200, stream(1, 3))
    assert all(row.mean_dpsi_sq <= 1e-24 for row in rows)
    with pytest.raises(CannotFitError):
        decay_fit_from_rows(rows, (1, 3))

def test_quadratic_f_decays_at_rate_two(problem_a):
    """For f = v^2, Delta psi_l is a squared half-batch difference, so E||Delta psi_l||^2 ~ 2^(-2l)."""
    fit = estimate_decay(problem_a, [1.0], range(1, 7), 4000, stream(2, 3), fit_range=(1, 6))
    assert fit.beta == pytest.approx(2.0, abs=0.3)

def test_moment_rows_are_consistent(problem_a):
    """Costs are 2^l, and ||mean Delta psi||^2 never exceeds the mean of ||Delta psi||^2."""
    rows = level_moments(problem_a, [1.0], [0, 2, 4], 500, stream(3, 3))
    assert [row.level for row in rows] == [0, 2, 4]
    for row in rows:
        assert row.mean_cost == 2.0 ** row.level and row.reps == 500
        assert row.mean_dpsi_norm ** 2 <= row.mean_dpsi_sq + 1e-12
    assert rows[0].mean_dpsi_sq == rows[0].mean_psi_sq

def test_standard_error_shrinks_with_reps(problem_a):
    """Eight times the draws give a clearly smaller standard error."""
    small = level_moments(problem_a, [1.0], [2], 500, stream(4, 3))[0]
    large = level_moments(problem_a, [1.0], [2], 4000, stream(5, 3))[0]
    assert large.se_dpsi_sq < small.se_dpsi_sq

@pytest.mark.parametrize("levels, reps", [([1, 2], 1), ([], 10), ([-1, 2], 10)])
def test_invalid_arguments(problem_a, levels, reps):
    """reps >= 2 and a non-empty set of nonnegative levels."""
    with pytest.raises(InvalidArgumentError):
        level_moments(problem_a, [1.0], levels, reps, stream(6, 3))
