from .base import CsoProblem, InnerBatch, OuterSample, SquaredLossProblem
from .discrete import (
    DiscreteCsoProblem,
    DiscreteOuter,
    DiscreteSquaredLossProblem,
    degenerate_squared_loss,
    oracle_a,
    oracle_affine,
    oracle_b,
)
from .iv import GroundTruth, IvDataProcess, IvOuter, IvProblem, IvTriple, iv_problem, iv_sample
from .logistic import LogisticInvariantModel, LogisticOuter, logistic_inner, logistic_outer, softplus
from .mlp import Mlp, mlp_backward, mlp_forward
