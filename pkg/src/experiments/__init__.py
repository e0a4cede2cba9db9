from .builders import build_estimator, build_problem, build_schedule, estimator_label, initial_point
from .commands import (
    OptimizeResult,
    cmd_beta,
    cmd_compare_variance,
    cmd_gradcheck,
    cmd_iv_fit,
    cmd_optimize,
    load_params,
)
