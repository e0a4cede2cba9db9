# src/experiments/builders.py

import numpy as np

from ..estimators.mlmc import LevelDistribution, MlmcSchedule
from ..optim.robbins_monro import (
    EstimatorConfig,
    ExactGradientConfig,
    FixedLevelMlmcConfig,
    NestedMcConfig,
    SquaredLossConfig,
    StepKind,
    StepSchedule,
    UnbiasedMlmcConfig,
)
from ..problems.base import CsoProblem
from ..problems.discrete import degenerate_squared_loss, oracle_a, oracle_affine, oracle_b
from ..problems.iv import GroundTruth, IvDataProcess, IvProblem
from ..problems.logistic import LogisticInvariantModel
from ..problems.mlp import Mlp
from ..rng.streams import StreamKey, StreamRole, derive
from ..utils.config_loader import EstimatorSettings, ProblemSettings, SgdSettings
from ..utils.exceptions import ConfigError

def build_problem(settings: ProblemSettings, kind: str | None = None) -> CsoProblem:
    """
    Instantiate the problem named by settings.kind (or by kind, if given).

    Args:
        settings (ProblemSettings): Problem parameters.
        kind (str | None): Overrides settings.kind, used by gradcheck to visit several models.

    Returns:
        CsoProblem: The problem.
    """
    kind = kind or settings.kind
    if kind == "logistic":
        return LogisticInvariantModel(settings.d, settings.sigma_xi2, settings.sigma_eta2)
    if kind == "iv":
        process = IvDataProcess(GroundTruth(settings.truth), settings.var_e, settings.var_gamma, settings.var_delta)
        return IvProblem(process, Mlp(settings.layers))
    builders = {
        "oracle_a": oracle_a,
        "oracle_b": oracle_b,
        "oracle_affine": oracle_affine,
        "degenerate": degenerate_squared_loss,
    }
    if kind not in builders:
        raise ConfigError(f"unknown problem {kind!r}", "problem.kind")
    return builders[kind]()

def build_estimator(settings: EstimatorSettings) -> EstimatorConfig:
    """Map validated estimator settings onto an EstimatorConfig."""
    if settings.kind == "mlmc":
        return UnbiasedMlmcConfig(settings.N, LevelDistribution(settings.tau, settings.l_hard))
    if settings.kind == "nested_mc":
        return NestedMcConfig(settings.M, settings.N)
    if settings.kind == "fixed_mlmc":
        return FixedLevelMlmcConfig(MlmcSchedule(settings.counts))
    if settings.kind == "squared_loss":
        return SquaredLossConfig(settings.variant, settings.M, settings.N)
    return ExactGradientConfig()

def build_schedule(settings: SgdSettings) -> StepSchedule:
    return StepSchedule(settings.gamma0, StepKind(settings.kind))

def estimator_label(settings: EstimatorSettings) -> str:
    """Directory name for an estimator's outputs, e.g. mlmc_tau1.5_N1 or squared_loss3_M2_N1."""
    if settings.label:
        return settings.label
    if settings.kind == "mlmc":
        return f"mlmc_tau{settings.tau:g}_N{settings.N}"
    if settings.kind == "nested_mc":
        return f"nested_mc_M{settings.M}_N{settings.N}"
    if settings.kind == "fixed_mlmc":
        return "fixed_mlmc_" + "-".join(str(n) for n in settings.counts)
    if settings.kind == "squared_loss":
        return f"squared_loss{settings.variant}_M{settings.M}_N{settings.N}"
    return settings.kind

def initial_point(problem: CsoProblem, settings: ProblemSettings, replicate: int = 0) -> np.ndarray:
    """
    Starting point for a replicate.

    An explicit problem.x0 wins. Otherwise IV networks use their fan-in scaled
    initialization and every other problem draws N(0, x0_scale^2 I). Draws come
    from the stream (init_seed, replicate, INIT), so every estimator of a run
    starts replicate r at the same point.
    """
    if settings.x0 is not None:
        if len(settings.x0) != problem.dim:
            raise ConfigError(f"expected {problem.dim} entries, got {len(settings.x0)}", "problem.x0")
        return np.asarray(settings.x0, dtype=np.float64)
    rng = derive(StreamKey(settings.init_seed, (replicate, StreamRole.INIT)))
    if isinstance(problem, IvProblem):
        return problem.net.init_params(rng)
    return rng.normal(0.0, settings.x0_scale, size=problem.dim)
