"""Pairwise causal direction by model evidence, with per-observation intercepts
standing in for unobserved common causes."""

from .dists import InvalidArgument, RngStream
from .marginal import MarginalEstimate, log_marginal, score_table
from .model import (Direction, ErrorFamily, HyperParams, PairDataset, ParamDraw, PriorFamily, default_tau_cmmn,
                    log_likelihood, residuals, sample_prior)
from .report import PairReport, ingest_csv, read_table
from .search import (DirectionEstimate, GridSpec, aggregate_ordering, estimate_direction, gaussianity_check,
                     grid_hyperparams)
from .synth import GenConfig, gen_pair, run_experiment, sample_source

__version__ = "0.1.0"

__all__ = [
    "InvalidArgument", "RngStream",
    "MarginalEstimate", "log_marginal", "score_table",
    "Direction", "ErrorFamily", "HyperParams", "PairDataset", "ParamDraw", "PriorFamily", "default_tau_cmmn",
    "log_likelihood", "residuals", "sample_prior",
    "PairReport", "ingest_csv", "read_table",
    "DirectionEstimate", "GridSpec", "aggregate_ordering", "estimate_direction", "gaussianity_check",
    "grid_hyperparams",
    "GenConfig", "gen_pair", "run_experiment", "sample_source",
]
