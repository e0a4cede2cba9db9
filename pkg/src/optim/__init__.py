from .robbins_monro import (
    EstimatorConfig,
    ExactGradientConfig,
    FixedLevelMlmcConfig,
    NestedMcConfig,
    RunTrace,
    SquaredLossConfig,
    StepKind,
    StepSchedule,
    TraceRow,
    UnbiasedMlmcConfig,
    budget_accounting,
    default_eval_every,
    robbins_monro,
)
