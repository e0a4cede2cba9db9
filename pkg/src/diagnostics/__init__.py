from .decay import DecayFit, LevelMoment, decay_fit_from_rows, estimate_decay, fit_beta, level_moments
from .gradcheck import GradCheckEntry, GradCheckReport, central_difference, grad_check, relative_error
from .objectives import (
    exact_objective,
    iv_noise_floor,
    objective_for,
    objective_iv,
    objective_mc_logistic,
)
from .variance import VarianceReport, trace_variance_with_se, variance_compare
