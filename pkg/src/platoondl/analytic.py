"""Closed-form stopping-time engine for two-vehicle collaborative downloading.

Two delivery schemes are analyzed for a platoon of two vehicles pulling an
M-packet file from roadside base stations, m packets per vehicle per round,
with perfect vehicle-to-vehicle exchange after every round:

* feedback scheme - each vehicle receives m uniformly random packets from its
  currently missing set.  The per-round overlap between the two vehicles'
  downloads is hypergeometric, which yields an exact recursion over the
  common-packet count and from it the exact distribution of the number of
  rounds until both vehicles hold everything.
* network-coding scheme - each transmission is a random linear combination
  with coefficients uniform over GF(2^q); completion is a rank condition on
  the accumulated 2m*t x M coefficient matrix, so the round count follows
  from the full-rank probability of uniform random matrices.

``exact_markov_oracle`` rebuilds the feedback distribution by brute-force
subset enumeration, sharing no formulas with the recursion, and is the ground
truth the closed forms are tested against.

All probability formulas use the field size Q = 2^q, never the exponent.
Probabilities are double precision; every quantity here is a short product or
sum of rationals in [0, 1], far more accurate than the 1e-9 test tolerances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

#: Geometric tails are truncated once the remaining mass drops below this.
TAIL_EPS = 1e-12

#: exact_markov_oracle refuses instances with C(M, m) above this.
ORACLE_GUARD = 10_000


class BoundaryError(ValueError):
    """Operation called outside its supported state range."""


class OracleGuardError(ValueError):
    """Enumeration oracle invoked on an instance too large to enumerate."""


def _comb(n: int, k: int) -> int:
    """Binomial coefficient with the zero convention for out-of-range args."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class ProblemSpec:
    """One problem instance: file size, per-contact budget, coding field."""

    total_packets: int
    per_round: int = 1
    field_exponent: int = 8
    vehicles: int = 2

    def __post_init__(self) -> None:
        if self.total_packets < 1:
            raise ValueError("total_packets must be >= 1")
        if not 1 <= self.per_round <= self.total_packets:
            raise ValueError("per_round must satisfy 1 <= m <= total_packets")
        if not 1 <= self.field_exponent <= 16:
            raise ValueError("field_exponent must be in [1, 16]")
        if self.vehicles != 2:
            raise ValueError("only the two-vehicle platoon is supported")

    @property
    def field_size(self) -> int:
        return 1 << self.field_exponent

    @property
    def min_rounds(self) -> int:
        """Fewest possible rounds: both vehicles' downloads all useful."""
        return _ceil_div(self.total_packets, 2 * self.per_round)

    @property
    def max_feedback_rounds(self) -> int:
        """Most possible feedback rounds: full overlap every round."""
        return _ceil_div(self.total_packets, self.per_round)


@dataclass(frozen=True)
class RoundPmf:
    """Distribution (or per-round bound series) over round counts.

    ``probs[k]`` belongs to round ``t_min + k``.  ``kind`` is "exact" for a
    normalized pmf and "bound" for a series of per-round upper bounds, which
    need not sum to anything meaningful; bound series carry ``mean=nan``.
    """

    t_min: int
    probs: tuple[float, ...]
    mean: float
    kind: str = "exact"

    @property
    def t_max(self) -> int:
        return self.t_min + len(self.probs) - 1

    def prob(self, t: int) -> float:
        k = t - self.t_min
        if 0 <= k < len(self.probs):
            return self.probs[k]
        return 0.0

    def total(self) -> float:
        return math.fsum(self.probs)

    def as_dict(self) -> dict[int, float]:
        return {self.t_min + k: p for k, p in enumerate(self.probs)}


@dataclass(frozen=True)
class StateDist:
    """Non-absorbed state distribution after round ``t``.

    ``dist[s]`` is the probability that both vehicles hold exactly ``s``
    packets at the end of round ``t`` without ever having completed; mass
    already absorbed at ``s = M`` is excluded, so the total can be < 1.
    """

    t: int
    dist: dict[int, float] = field(default_factory=dict)

    def total(self) -> float:
        return math.fsum(self.dist.values())


def total_variation(a: RoundPmf, b: RoundPmf) -> float:
    """Half the L1 distance between two round pmfs."""
    support = set(a.as_dict()) | set(b.as_dict())
    return 0.5 * math.fsum(abs(a.prob(t) - b.prob(t)) for t in support)


# ---------------------------------------------------------------------------
# feedback scheme
# ---------------------------------------------------------------------------

def common_packet_pmf(s: int, spec: ProblemSpec) -> dict[int, float]:
    """Distribution of the overlap between the two vehicles' round downloads.

    Both vehicles draw m-subsets of the same (M - s)-packet missing set,
    independently and uniformly; the overlap count is hypergeometric.  Needs
    M - s >= m so that full m-subsets exist on both sides; terminal rounds
    with fewer missing packets are handled by the stopping logic instead.
    """
    M, m = spec.total_packets, spec.per_round
    if not 0 <= s <= M - 1:
        raise BoundaryError(f"s must be in [0, {M - 1}], got {s}")
    missing = M - s
    if missing < m:
        raise BoundaryError(
            f"common_packet_pmf needs M - s >= m ({missing} < {m}); "
            "terminal rounds deliver every missing packet"
        )
    denom = _comb(missing, m)
    lo = max(0, 2 * m - missing)
    return {x: _comb(m, x) * _comb(missing - m, m - x) / denom
            for x in range(lo, m + 1)}


def _feedback_step(spec: ProblemSpec, state: dict[int, float]) -> tuple[dict[int, float], float]:
    """Advance the common-packet-count distribution by one round.

    Returns the next non-absorbed distribution and the mass that completed
    (reached s = M) during this round.  Transition weights are the overlap
    probabilities rearranged per target state; sources with fewer than m
    packets missing complete with certainty (their out-of-range binomials
    vanish under the zero convention, and the stopping weight is 1).
    """
    M, m = spec.total_packets, spec.per_round
    stopped = 0.0
    for i in range(1, 2 * m + 1):
        p = state.get(M - i)
        if not p:
            continue
        if i <= m:
            stopped += p
        else:
            stopped += p * _comb(m, 2 * m - i) / _comb(i, m)
    nxt: dict[int, float] = {}
    for s_prev, p in state.items():
        for i in range(m, 2 * m + 1):
            s = s_prev + i
            if s >= M:
                continue
            num = _comb(m, 2 * m - i) * _comb(M - s + i - m, i - m)
            if num == 0:
                continue
            nxt[s] = nxt.get(s, 0.0) + p * num / _comb(M - s + i, m)
    return nxt, stopped


def feedback_state_recursion(spec: ProblemSpec, t_max: int) -> list[StateDist]:
    """Non-absorbed state distributions for rounds 1..t_max."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    out = []
    state = {0: 1.0}
    for t in range(1, t_max + 1):
        state, _ = _feedback_step(spec, state)
        out.append(StateDist(t, dict(sorted(state.items()))))
    return out


def feedback_stopping_pmf(spec: ProblemSpec) -> RoundPmf:
    """Exact distribution of the feedback scheme's round count."""
    masses: dict[int, float] = {}
    state = {0: 1.0}
    t = 0
    while state:
        t += 1
        if t > spec.max_feedback_rounds:
            raise AssertionError("feedback recursion failed to absorb in ceil(M/m) rounds")
        state, stopped = _feedback_step(spec, state)
        if stopped:
            masses[t] = stopped
    t_min = min(masses)
    probs = tuple(masses.get(t, 0.0) for t in range(t_min, max(masses) + 1))
    mean = math.fsum(t * p for t, p in masses.items())
    return RoundPmf(t_min, probs, mean)


def _union_size_dists(M: int, m: int) -> dict[int, dict[int, float]]:
    """Per missing-count distributions of |A union B| by subset enumeration.

    A and B are the two vehicles' draws of min(m, missing) packets from the
    missing set.  A is pinned to the first k packets - by exchangeability the
    union-size law given any A is the same - and B runs over every k-subset.
    No closed-form counting is used anywhere here.
    """
    dists: dict[int, dict[int, float]] = {}
    for missing in range(1, M + 1):
        k = min(m, missing)
        fixed = frozenset(range(k))
        counts: dict[int, int] = {}
        total = 0
        for other in itertools.combinations(range(missing), k):
            u = len(fixed.union(other))
            counts[u] = counts.get(u, 0) + 1
            total += 1
        dists[missing] = {u: c / total for u, c in counts.items()}
    return dists


def _oracle_forward(spec: ProblemSpec) -> tuple[dict[int, float], list[StateDist]]:
    """Absorbing forward pass over the enumerated union-size kernel."""
    M, m = spec.total_packets, spec.per_round
    if math.comb(M, m) > ORACLE_GUARD:
        raise OracleGuardError(
            f"C({M}, {m}) = {math.comb(M, m)} exceeds the enumeration guard {ORACLE_GUARD}"
        )
    kernel = _union_size_dists(M, m)
    masses: dict[int, float] = {}
    states = []
    state = {0: 1.0}
    t = 0
    while state:
        t += 1
        if t > spec.max_feedback_rounds:
            raise AssertionError("oracle failed to absorb in ceil(M/m) rounds")
        nxt: dict[int, float] = {}
        stopped = 0.0
        for s, p in state.items():
            for u, pu in kernel[M - s].items():
                if s + u >= M:
                    stopped += p * pu
                else:
                    nxt[s + u] = nxt.get(s + u, 0.0) + p * pu
        if stopped:
            masses[t] = stopped
        state = nxt
        states.append(StateDist(t, dict(sorted(state.items()))))
    return masses, states


def exact_markov_oracle(spec: ProblemSpec) -> RoundPmf:
    """Feedback round-count pmf by exhaustive enumeration.

    Independent of the closed-form recursion: the per-state transition law
    comes from enumerating subset draws, terminal capped rounds included.
    Guarded to small instances (C(M, m) <= ORACLE_GUARD).
    """
    masses, _ = _oracle_forward(spec)
    t_min = min(masses)
    probs = tuple(masses.get(t, 0.0) for t in range(t_min, max(masses) + 1))
    mean = math.fsum(t * p for t, p in masses.items())
    return RoundPmf(t_min, probs, mean)


def oracle_state_dists(spec: ProblemSpec, t_max: int) -> list[StateDist]:
    """Enumeration-based counterpart of :func:`feedback_state_recursion`."""
    _, states = _oracle_forward(spec)
    while len(states) < t_max:
        states.append(StateDist(len(states) + 1, {}))
    return states[:t_max]


# ---------------------------------------------------------------------------
# network-coding scheme
# ---------------------------------------------------------------------------

def rank_full_probability(rows: int, cols: int, field_exponent: int) -> float:
    """P(a uniform random rows x cols matrix over GF(2^q) has rank = cols).

    prod_{i=1..cols} (1 - Q^-(rows - cols + i)) with Q the field size; 0 when
    rows < cols.  Increasing in rows and in the exponent.
    """
    if cols < 1:
        raise ValueError("cols must be >= 1")
    if not 1 <= field_exponent <= 16:
        raise ValueError("field_exponent must be in [1, 16]")
    if rows < cols:
        return 0.0
    Q = 1 << field_exponent
    p = 1.0
    for i in range(1, cols + 1):
        p *= 1.0 - Q ** float(-(rows - cols + i))
    return p


def nc_exact_pmf(spec: ProblemSpec) -> RoundPmf:
    """Exact round-count distribution for the network-coding scheme.

    After t rounds the pooled coefficient matrix is 2m*t x M with i.i.d.
    uniform entries, so P(done by t) is the full-rank probability and the
    pmf is its difference sequence.  The geometric tail is truncated below
    TAIL_EPS, leaving the total within 1e-9 of 1.
    """
    M, m, q = spec.total_packets, spec.per_round, spec.field_exponent
    t_min = spec.min_rounds
    probs = []
    f_prev = 0.0
    t = t_min - 1
    while True:
        t += 1
        f = rank_full_probability(2 * m * t, M, q)
        probs.append(max(f - f_prev, 0.0))
        f_prev = f
        if 1.0 - f < TAIL_EPS:
            break
    mean = math.fsum((t_min + k) * p for k, p in enumerate(probs))
    return RoundPmf(t_min, tuple(probs), mean)


#: Forms accepted by :func:`nc_stopping_pmf_bound`.
BOUND_FORMS = ("tight", "loose", "transmission")


def nc_stopping_pmf_bound(spec: ProblemSpec, form: str = "tight") -> RoundPmf:
    """Per-round upper-bound series for the network-coding round count.

    Three forms, all clamped to [0, 1] and truncated below TAIL_EPS:

    * "tight": (1 - 1/Q) * (1 - P(rank(2m*t - 1 rows) = M)) - conditions on
      the last transmission of round t completing the rank.
    * "loose": (1 - 1/Q) * Q^-(2m*t - M) - geometric approximation of the
      tight form for large fields.
    * "transmission": the tight single-transmission bound summed over all 2m
      transmissions of round t.  Unlike the other two, this one provably
      dominates the exact pmf at every round: completion within round t
      happens at one of its transmissions, and completion exactly at a given
      transmission requires rank M-1 just before it plus an innovative row
      (probability exactly 1 - 1/Q).  The "tight" and "loose" forms keep only
      the final transmission's term and fall below the exact pmf from
      t_min + 1 onward; see nc tests for the measured gap.

    Not a distribution: values need not sum to 1 and ``mean`` is nan.
    """
    if form not in BOUND_FORMS:
        raise ValueError(f"form must be one of {BOUND_FORMS}, got {form!r}")
    M, m, q = spec.total_packets, spec.per_round, spec.field_exponent
    Q = spec.field_size
    factor = 1.0 - 1.0 / Q
    t_min = spec.min_rounds
    values = []
    t = t_min - 1
    while True:
        t += 1
        if form == "tight":
            v = factor * (1.0 - rank_full_probability(2 * m * t - 1, M, q))
        elif form == "loose":
            v = factor * Q ** float(-(2 * m * t - M))
        else:
            v = factor * math.fsum(
                1.0 - rank_full_probability(r, M, q)
                for r in range(2 * m * (t - 1), 2 * m * t)
            )
        values.append(min(max(v, 0.0), 1.0))
        if values[-1] < TAIL_EPS:
            break
        if t - t_min > 100_000:
            raise AssertionError("bound series failed to decay")
    return RoundPmf(t_min, tuple(values), float("nan"), kind="bound")


def nc_expected_bound(spec: ProblemSpec) -> float:
    """Advertised ceiling M/(2m) + 1/(Q - 1) on the expected NC round count.

    Exact only when 2m divides M; otherwise the true mean sits near
    ceil(M/(2m)) and exceeds this value by up to one round, since the round
    count is integral.  Returned as stated, divisibility caveat and all; for
    Q = 2 the additive term is 1.
    """
    M, m = spec.total_packets, spec.per_round
    return M / (2 * m) + 1.0 / (spec.field_size - 1)
