"""Monte Carlo trials: protocol invariants, determinism, backend equivalence."""

import math

import numpy as np
import pytest

from platoondl import sim
from platoondl.analytic import ProblemSpec, feedback_stopping_pmf, total_variation
from platoondl.gf2q import FieldContext
from platoondl.rng import Stream
from platoondl.sim import (
    available_backends,
    batch_rounds,
    iter_feedback_common_sizes,
    iter_nc_ranks,
    resolve_backend,
    run_experiment,
    run_feedback_trial,
    run_nc_trial,
    summarize_rounds,
)

HAVE_COMPILED = "compiled" in available_backends()
needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernels not built")

# statistical checks shrink on the pure-Python fallback to stay quick
N_STAT = 100_000 if HAVE_COMPILED else 20_000
TOL_SCALE = 1.0 if HAVE_COMPILED else math.sqrt(100_000 / 20_000)


# -- single-trial reference ----------------------------------------------------

def test_feedback_single_packet_always_one_round():
    spec = ProblemSpec(1, 1)
    for idx in range(50):
        out = run_feedback_trial(spec, Stream.for_trial(3, idx))
        assert out.rounds == 1 and out.scheme == "feedback"


def test_feedback_round_support_M10_m5():
    spec = ProblemSpec(10, 5)
    seen = set()
    for idx in range(500):
        seen.add(run_feedback_trial(spec, Stream.for_trial(11, idx)).rounds)
    assert seen == {1, 2}


def test_feedback_round_bounds():
    for M, m in ((9, 1), (12, 2), (17, 5)):
        spec = ProblemSpec(M, m)
        lo, hi = spec.min_rounds, spec.max_feedback_rounds
        for idx in range(300):
            r = run_feedback_trial(spec, Stream.for_trial(99, idx)).rounds
            assert lo <= r <= hi


def test_feedback_common_size_growth():
    spec = ProblemSpec(13, 2)
    for idx in range(200):
        sizes = list(iter_feedback_common_sizes(spec, Stream.for_trial(7, idx)))
        prev = 0
        for size in sizes:
            missing = spec.total_packets - prev
            gain = size - prev
            assert min(spec.per_round, missing) <= gain <= min(2 * spec.per_round, missing)
            prev = size
        assert sizes[-1] == spec.total_packets


def test_nc_rank_growth_and_minimum_rounds():
    spec = ProblemSpec(9, 2, 4)
    ctx = FieldContext(4)
    for idx in range(150):
        ranks = list(iter_nc_ranks(spec, Stream.for_trial(21, idx), ctx))
        prev = 0
        for r in ranks:
            assert 0 <= r - prev <= 2 * spec.per_round
            prev = r
        assert ranks[-1] == spec.total_packets
        assert len(ranks) >= spec.min_rounds


def test_nc_trial_outcome():
    out = run_nc_trial(ProblemSpec(4, 1, 8), Stream.for_trial(5, 0), seed_stream_id=0)
    assert out.scheme == "nc" and out.rounds >= 2 and out.seed_stream_id == 0


# -- backend equivalence ---------------------------------------------------------

@needs_compiled
@pytest.mark.parametrize("scheme,M,m,q", [
    ("feedback", 8, 1, 8),
    ("feedback", 11, 3, 8),
    ("feedback", 5, 5, 8),
    ("nc", 8, 1, 8),
    ("nc", 9, 2, 4),
    ("nc", 6, 1, 1),
    ("nc", 7, 3, 16),
])
def test_backends_bit_identical(scheme, M, m, q):
    spec = ProblemSpec(M, m, q)
    a = batch_rounds(scheme, spec, 300, 1234, backend="compiled")
    b = batch_rounds(scheme, spec, 300, 1234, backend="python")
    assert (a == b).all()


@needs_compiled
def test_kernel_stream_matches_reference():
    from platoondl import _kernels

    for master, idx in ((42, 0), (42, 7), (2**63, 12345)):
        s = Stream.for_trial(master, idx)
        assert [s.next_u64() for _ in range(32)] == _kernels.stream_u64(master, idx, 32).tolist()
        s = Stream.for_trial(master, idx)
        assert [s.below(13) for _ in range(32)] == _kernels.stream_below(master, idx, 32, 13).tolist()


def test_resolve_backend(monkeypatch):
    monkeypatch.delenv("PLATOONDL_BACKEND", raising=False)
    assert resolve_backend("python") == "python"
    monkeypatch.setenv("PLATOONDL_BACKEND", "python")
    assert resolve_backend() == "python"
    with pytest.raises(ValueError):
        resolve_backend("fortran")


# -- determinism ------------------------------------------------------------------

def test_batch_deterministic_across_runs():
    spec = ProblemSpec(7, 1, 8)
    for scheme in ("feedback", "nc"):
        a = batch_rounds(scheme, spec, 500, 42)
        b = batch_rounds(scheme, spec, 500, 42)
        assert (a == b).all()


def test_batch_chunking_invariance():
    # absolute trial indexing: any split of the range reproduces the whole
    spec = ProblemSpec(9, 2, 8)
    whole = batch_rounds("nc", spec, 400, 7)
    parts = np.concatenate([
        batch_rounds("nc", spec, 150, 7, first_trial=0),
        batch_rounds("nc", spec, 150, 7, first_trial=150),
        batch_rounds("nc", spec, 100, 7, first_trial=300),
    ])
    assert (whole == parts).all()


def test_run_experiment_worker_count_invariance():
    spec = ProblemSpec(6, 1, 4)
    base = run_experiment(spec, trials=900, seed=5, workers=1)
    for workers in (2, 3):
        other = run_experiment(spec, trials=900, seed=5, workers=workers)
        assert other == base


# -- empirical agreement -----------------------------------------------------------

def test_feedback_M2_first_round_probability():
    rounds = batch_rounds("feedback", ProblemSpec(2, 1), N_STAT, 42)
    assert abs((rounds == 1).mean() - 0.5) < 0.01 * TOL_SCALE


def test_nc_M2_q1_first_round_probability():
    rounds = batch_rounds("nc", ProblemSpec(2, 1, 1), N_STAT, 42)
    assert abs((rounds == 1).mean() - 6 / 16) < 0.01 * TOL_SCALE


def test_nc_mean_within_ceiling_q4():
    # divisible case (2m | M), so the advertised mean ceiling applies
    spec = ProblemSpec(10, 1, 4)
    rounds = batch_rounds("nc", spec, N_STAT, 42)
    stderr = rounds.std(ddof=1) / math.sqrt(rounds.size)
    assert rounds.mean() <= 5 + 1 / 15 + 3 * stderr * TOL_SCALE


def test_empirical_feedback_tvd_quick():
    spec = ProblemSpec(10, 1)
    summary = run_experiment(spec, trials=10_000, seed=42, scheme="feedback")
    analytic_pmf = feedback_stopping_pmf(spec)
    pmf = summary.results["feedback"].pmf()
    tvd = 0.5 * sum(
        abs(pmf.get(t, 0.0) - analytic_pmf.prob(t))
        for t in set(pmf) | set(analytic_pmf.as_dict())
    )
    assert tvd < 0.05


# -- aggregation --------------------------------------------------------------------

def test_run_experiment_point_mass():
    summary = run_experiment(ProblemSpec(1, 1), trials=1, seed=0, scheme="feedback")
    s = summary.results["feedback"]
    assert s.pmf() == {1: 1.0}
    assert s.mean == 1.0 and s.stderr == 0.0
    assert s.t_min == s.t_max == 1


def test_run_experiment_both_schemes():
    summary = run_experiment(ProblemSpec(6, 1, 8), trials=300, seed=9)
    assert set(summary.results) == {"feedback", "nc"}
    for s in summary.results.values():
        assert s.trials == 300
        assert sum(s.counts.values()) == 300
        assert abs(sum(s.pmf().values()) - 1.0) < 1e-12


def test_summarize_rounds_statistics():
    rounds = np.array([3, 4, 4, 5], dtype=np.int64)
    s = summarize_rounds("feedback", rounds, seed=1)
    assert s.counts == {3: 1, 4: 2, 5: 1}
    assert s.mean == pytest.approx(4.0)
    assert s.stderr == pytest.approx(np.std(rounds, ddof=1) / 2)
    assert (s.t_min, s.t_max) == (3, 5)


def test_invalid_scheme_rejected():
    with pytest.raises(ValueError):
        batch_rounds("carrier-pigeon", ProblemSpec(4, 1), 10, 0)
    with pytest.raises(ValueError):
        run_experiment(ProblemSpec(4, 1), trials=0, seed=0)
