from .base import GradientEstimate, psi_from_means, psi_level
from .mlmc import (
    LevelDistribution,
    MlmcSchedule,
    delta_psi,
    delta_psi_from_batch,
    draw_level_statistics,
    expected_cost,
    fixed_level_mlmc_gradient,
    level_statistics,
    sample_level,
    unbiased_mlmc_gradient,
)
from .nested_mc import nested_mc_gradient
from .squared_loss import (
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
