"""Seeded Monte Carlo simulation of full download rounds for both schemes.

Each trial is an independent replay of the round protocol: per round the two
vehicles receive their packets (uniform missing-subsets for the feedback
scheme, uniform coefficient rows for network coding), pool them through the
perfect vehicle-to-vehicle exchange, and stop when the file is complete
(common set full, or coefficient rank M).

Trials draw from per-trial random streams keyed by (master seed, absolute
trial index), so results are bit-identical no matter how a trial range is
chunked over workers.  The hot loops also exist as a compiled extension
(``platoondl._kernels``); it is selected at import when present and must
reproduce the pure-Python reference here draw for draw.  Set
``PLATOONDL_BACKEND=python`` or ``=compiled`` to force a side.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import ProblemSpec
from .ffmatrix import EchelonBasis
from .gf2q import FieldContext
from .rng import Stream

try:
    from . import _kernels as _compiled
except ImportError:  # pure-Python install
    _compiled = None

SCHEMES = ("feedback", "nc")


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _compiled is not None else ("python",)


def resolve_backend(backend: str | None = None) -> str:
    """Map an explicit choice or the PLATOONDL_BACKEND env var to a backend."""
    choice = backend or os.environ.get("PLATOONDL_BACKEND", "auto")
    if choice == "auto":
        return "compiled" if _compiled is not None else "python"
    if choice == "compiled" and _compiled is None:
        raise RuntimeError("compiled kernels are not available in this install")
    if choice not in ("compiled", "python"):
        raise ValueError(f"unknown backend {choice!r}")
    return choice


@dataclass(frozen=True)
class TrialOutcome:
    rounds: int
    scheme: str
    seed_stream_id: int = -1


# ---------------------------------------------------------------------------
# reference per-trial implementations (the contract the kernels must match)
# ---------------------------------------------------------------------------

def iter_feedback_common_sizes(spec: ProblemSpec, rng: Stream):
    """Run one feedback trial, yielding the common-set size after each round.

    Per round each vehicle independently picks min(m, missing) distinct
    packets from the shared missing list via partial Fisher-Yates; the union
    of the two picks leaves the missing list.  The walk stops at size M.
    """
    M, m = spec.total_packets, spec.per_round
    missing = list(range(M))
    stamp = [0] * M
    n = M
    rounds = 0
    while n:
        rounds += 1
        k = m if m < n else n
        for _vehicle in range(2):
            for i in range(k):
                j = i + rng.below(n - i)
                missing[i], missing[j] = missing[j], missing[i]
                stamp[missing[i]] = rounds
        w = 0
        for i in range(n):
            pkt = missing[i]
            if stamp[pkt] != rounds:
                missing[w] = pkt
                w += 1
        n = w
        yield M - n


def iter_nc_ranks(spec: ProblemSpec, rng: Stream, ctx: FieldContext | None = None):
    """Run one network-coding trial, yielding the rank after each round.

    Per round 2m uniform coefficient rows (m per vehicle, pooled by the
    vehicle exchange) enter an echelon basis; remaining transmissions of the
    final round are skipped once the rank hits M.
    """
    M, m = spec.total_packets, spec.per_round
    if ctx is None:
        ctx = FieldContext(spec.field_exponent)
    mask = ctx.order - 1
    basis = EchelonBasis(ctx, M)
    while basis.rank < M:
        for _tx in range(2 * m):
            row = [rng.next_u64() & mask for _ in range(M)]
            basis.insert(row)
            if basis.rank == M:
                break
        yield basis.rank


def run_feedback_trial(spec: ProblemSpec, rng: Stream, seed_stream_id: int = -1) -> TrialOutcome:
    rounds = sum(1 for _ in iter_feedback_common_sizes(spec, rng))
    return TrialOutcome(rounds, "feedback", seed_stream_id)


def run_nc_trial(spec: ProblemSpec, rng: Stream, ctx: FieldContext | None = None,
                 seed_stream_id: int = -1) -> TrialOutcome:
    rounds = sum(1 for _ in iter_nc_ranks(spec, rng, ctx))
    return TrialOutcome(rounds, "nc", seed_stream_id)


# ---------------------------------------------------------------------------
# batch runners
# ---------------------------------------------------------------------------

def _batch_python(scheme: str, spec: ProblemSpec, n_trials: int,
                  master_seed: int, first_trial: int) -> np.ndarray:
    out = np.empty(n_trials, dtype=np.int64)
    ctx = FieldContext(spec.field_exponent) if scheme == "nc" else None
    for i in range(n_trials):
        rng = Stream.for_trial(master_seed, first_trial + i)
        if scheme == "feedback":
            out[i] = run_feedback_trial(spec, rng).rounds
        else:
            out[i] = run_nc_trial(spec, rng, ctx).rounds
    return out


def _batch_compiled(scheme: str, spec: ProblemSpec, n_trials: int,
                    master_seed: int, first_trial: int) -> np.ndarray:
    if scheme == "feedback":
        return _compiled.feedback_rounds(spec.total_packets, spec.per_round,
                                         n_trials, master_seed, first_trial)
    ctx = FieldContext(spec.field_exponent)
    exp_t = np.asarray(ctx.exp_table, dtype=np.int32)
    log_t = np.asarray(ctx.log_table, dtype=np.int32)
    return _compiled.nc_rounds(spec.total_packets, spec.per_round,
                               ctx.exponent, exp_t, log_t,
                               n_trials, master_seed, first_trial)


def batch_rounds(scheme: str, spec: ProblemSpec, n_trials: int, master_seed: int,
                 first_trial: int = 0, backend: str | None = None) -> np.ndarray:
    """Round counts for trials [first_trial, first_trial + n_trials)."""
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if n_trials < 0:
        raise ValueError("n_trials must be >= 0")
    runner = _batch_compiled if resolve_backend(backend) == "compiled" else _batch_python
    return runner(scheme, spec, n_trials, master_seed, first_trial)


def _batch_worker(args) -> np.ndarray:
    scheme, spec, n_trials, master_seed, first_trial, backend = args
    return batch_rounds(scheme, spec, n_trials, master_seed, first_trial, backend)


def _run_batch(scheme: str, spec: ProblemSpec, trials: int, seed: int,
               workers: int, backend: str | None) -> np.ndarray:
    if workers <= 1 or trials < 2 * workers:
        return batch_rounds(scheme, spec, trials, seed, 0, backend)
    chunk = -(-trials // workers)
    jobs = [(scheme, spec, min(chunk, trials - start), seed, start, backend)
            for start in range(0, trials, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_batch_worker, jobs))
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchemeSummary:
    """Empirical round-count statistics for one scheme."""

    scheme: str
    trials: int
    seed: int
    counts: dict[int, int]
    mean: float
    stderr: float
    t_min: int
    t_max: int

    def pmf(self) -> dict[int, float]:
        return {t: c / self.trials for t, c in self.counts.items()}


@dataclass(frozen=True)
class ExperimentSummary:
    spec: ProblemSpec
    trials: int
    seed: int
    results: dict[str, SchemeSummary]


def summarize_rounds(scheme: str, rounds: np.ndarray, seed: int) -> SchemeSummary:
    values, counts = np.unique(rounds, return_counts=True)
    n = int(rounds.size)
    mean = float(rounds.mean())
    stderr = float(rounds.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return SchemeSummary(
        scheme=scheme,
        trials=n,
        seed=seed,
        counts={int(v): int(c) for v, c in zip(values, counts)},
        mean=mean,
        stderr=stderr,
        t_min=int(values[0]),
        t_max=int(values[-1]),
    )


def run_experiment(spec: ProblemSpec, trials: int, seed: int, scheme: str = "both",
                   workers: int = 1, backend: str | None = None) -> ExperimentSummary:
    """Run seeded trials of one or both schemes and aggregate.

    Output is a pure function of (spec, trials, seed, scheme): worker count
    and backend only affect speed.  Both schemes share trial indices, so
    their streams are decoupled only by how the protocols consume draws.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    schemes = SCHEMES if scheme == "both" else (scheme,)
    results = {}
    for sch in schemes:
        rounds = _run_batch(sch, spec, trials, seed, workers, backend)
        results[sch] = summarize_rounds(sch, rounds, seed)
    return ExperimentSummary(spec=spec, trials=trials, seed=seed, results=results)
