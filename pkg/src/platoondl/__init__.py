"""Stopping-time analysis and simulation of two-vehicle collaborative downloading.

A platoon of two vehicles pulls an M-packet file from roadside base stations,
m packets per vehicle per contact, pooling everything over a perfect
vehicle-to-vehicle exchange after each round.  This package provides, for
both the feedback packet scheme and the random-linear-network-coding scheme:

* exact closed-form round-count distributions (``platoondl.analytic``),
* an independent brute-force enumeration oracle (``exact_markov_oracle``),
* seeded Monte Carlo simulation with a compiled fast path (``platoondl.sim``),
* GF(2^q) arithmetic and incremental rank tracking (``gf2q``, ``ffmatrix``),
* a CLI for sweep experiments with CSV output (``platoondl.cli``).
"""

from .analytic import (
    BoundaryError,
    OracleGuardError,
    ProblemSpec,
    RoundPmf,
    StateDist,
    common_packet_pmf,
    exact_markov_oracle,
    feedback_state_recursion,
    feedback_stopping_pmf,
    nc_exact_pmf,
    nc_expected_bound,
    nc_stopping_pmf_bound,
    rank_full_probability,
    total_variation,
)
from .ffmatrix import CoeffMatrix, EchelonBasis, insert_row, random_matrix, rank
from .gf2q import FieldContext, FieldElement, add, inv, mul, random_element
from .rng import Stream
from .sim import (
    ExperimentSummary,
    SchemeSummary,
    TrialOutcome,
    available_backends,
    batch_rounds,
    resolve_backend,
    run_experiment,
    run_feedback_trial,
    run_nc_trial,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryError",
    "CoeffMatrix",
    "EchelonBasis",
    "ExperimentSummary",
    "FieldContext",
    "FieldElement",
    "OracleGuardError",
    "ProblemSpec",
    "RoundPmf",
    "SchemeSummary",
    "StateDist",
    "Stream",
    "TrialOutcome",
    "add",
    "available_backends",
    "batch_rounds",
    "common_packet_pmf",
    "exact_markov_oracle",
    "feedback_state_recursion",
    "feedback_stopping_pmf",
    "insert_row",
    "inv",
    "mul",
    "nc_exact_pmf",
    "nc_expected_bound",
    "nc_stopping_pmf_bound",
    "random_element",
    "random_matrix",
    "rank",
    "rank_full_probability",
    "resolve_backend",
    "run_experiment",
    "run_feedback_trial",
    "run_nc_trial",
    "total_variation",
]
