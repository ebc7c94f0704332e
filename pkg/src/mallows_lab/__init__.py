"""Exact and Monte Carlo tools for the Mallows measure on permutations."""

from .bounds import ConstantsConfig, DEFAULT_CONSTANTS, ell_beta, lds_regime
from .exact import ExactDistribution, enumerate_distribution, total_variation
from .model import (
    MallowsParams,
    ProcessRecord,
    log_partition_function,
    partition_function,
    replay_process,
    run_process,
    sample_mallows,
    sample_mallows_batch,
)
from .montecarlo import Estimate, TailEstimate, estimate_statistic, estimate_tails
from .perm import (
    as_permutation,
    format_permutation,
    identity,
    inversion_count,
    invert,
    lds_length,
    lis_length,
    parse_permutation,
    reverse,
)
from .rng import SeedSpec
from .verify import VerificationReport, run_verification

__all__ = [
    "ConstantsConfig",
    "DEFAULT_CONSTANTS",
    "Estimate",
    "ExactDistribution",
    "MallowsParams",
    "ProcessRecord",
    "SeedSpec",
    "TailEstimate",
    "VerificationReport",
    "as_permutation",
    "ell_beta",
    "enumerate_distribution",
    "estimate_statistic",
    "estimate_tails",
    "format_permutation",
    "identity",
    "inversion_count",
    "invert",
    "lds_length",
    "lds_regime",
    "lis_length",
    "log_partition_function",
    "parse_permutation",
    "partition_function",
    "replay_process",
    "reverse",
    "run_process",
    "run_verification",
    "sample_mallows",
    "sample_mallows_batch",
    "total_variation",
]
