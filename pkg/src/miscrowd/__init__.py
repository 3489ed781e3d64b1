"""Crowdsourced label aggregation mixed with low-rank Tucker completion."""

from .aggregate import ConfusionModel, EmConfig, ds_em, ds_mf, get_aggregator, majority_vote
from .labels import (
    AggregationResult,
    annotation_error_rate,
    binarize,
    binarize_prediction,
    decode_argmax,
    estimation_error,
    nonzero_rate,
)
from .misc import MiscConfig, MiscTrace, complete_only, run_misc
from .tucker import StopRule, TuckerModel, hooi, hosvd, multilinear_ranks, reconstruct

__version__ = "0.1.0"
