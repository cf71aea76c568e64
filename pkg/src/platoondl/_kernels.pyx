# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial kernels for the round simulations.

Byte-compatible with the pure-Python reference in ``platoondl.sim``: the
stream construction, draw order and protocol steps are line-for-line the
same, so (master seed, trial index) yields identical round counts on either
backend.  Tests assert that equivalence; change both sides or neither.
"""

from libc.stdint cimport int32_t, int64_t, uint64_t

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15
cdef uint64_t ALTBITS = 0xAAAAAAAAAAAAAAAA


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z ^= z >> 33
    z *= <uint64_t>0xFF51AFD7ED558CCD
    z ^= z >> 33
    z *= <uint64_t>0xC4CEB9FE1A85EC53
    z ^= z >> 33
    return z


cdef inline uint64_t _mix13(uint64_t z) noexcept nogil:
    z ^= z >> 30
    z *= <uint64_t>0xBF58476D1CE4E5B9
    z ^= z >> 27
    z *= <uint64_t>0x94D049BB133111EB
    z ^= z >> 31
    return z


cdef inline int _popcount(uint64_t x) noexcept nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef inline uint64_t _mix_gamma(uint64_t z) noexcept nogil:
    z = _mix13(z) | <uint64_t>1
    if _popcount(z ^ (z >> 1)) < 24:
        z ^= ALTBITS
    return z


cdef struct Stream:
    uint64_t state
    uint64_t gamma


cdef inline void _for_trial(Stream* s, uint64_t master, uint64_t idx) noexcept nogil:
    cdef uint64_t base = master + (2 * idx + 1) * GOLDEN
    s.state = _mix64(base)
    s.gamma = _mix_gamma(base + GOLDEN)


cdef inline uint64_t _next(Stream* s) noexcept nogil:
    s.state += s.gamma
    return _mix13(s.state)


cdef inline uint64_t _below(Stream* s, uint64_t n) noexcept nogil:
    # masked rejection; draws nothing for n <= 1, like Stream.below
    cdef uint64_t mask, v
    if n <= 1:
        return 0
    mask = n - 1
    mask |= mask >> 1
    mask |= mask >> 2
    mask |= mask >> 4
    mask |= mask >> 8
    mask |= mask >> 16
    mask |= mask >> 32
    while True:
        v = _next(s) & mask
        if v < n:
            return v


def backend_name():
    return "compiled"


def stream_u64(master_seed, int64_t trial_index, int n):
    """Raw per-trial stream words; cross-checked against rng.Stream."""
    cdef uint64_t seed = <uint64_t>(master_seed & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] out_v = out
    cdef Stream s
    cdef int i
    _for_trial(&s, seed, <uint64_t>trial_index)
    for i in range(n):
        out_v[i] = _next(&s)
    return out


def stream_below(master_seed, int64_t trial_index, int n, uint64_t bound):
    """Bounded draws from a per-trial stream; cross-checked against rng.Stream."""
    cdef uint64_t seed = <uint64_t>(master_seed & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] out_v = out
    cdef Stream s
    cdef int i
    _for_trial(&s, seed, <uint64_t>trial_index)
    for i in range(n):
        out_v[i] = _below(&s, bound)
    return out


def feedback_rounds(int total_packets, int per_round, int64_t n_trials,
                    master_seed, int64_t first_trial):
    """Round counts of ``n_trials`` feedback-scheme trials."""
    cdef int M = total_packets
    cdef int m = per_round
    if M < 1 or m < 1 or m > M:
        raise ValueError("need 1 <= per_round <= total_packets")
    if n_trials < 0 or first_trial < 0:
        raise ValueError("n_trials and first_trial must be >= 0")
    cdef uint64_t seed = <uint64_t>(master_seed & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(n_trials, dtype=np.int64)
    miss_arr = np.empty(M, dtype=np.int32)
    stamp_arr = np.zeros(M, dtype=np.int32)
    cdef int64_t[::1] out_v = out
    cdef int32_t[::1] miss = miss_arr
    cdef int32_t[::1] stamp = stamp_arr
    cdef Stream s
    cdef int64_t trial
    cdef int n, k, i, j, w, rounds, vehicle
    cdef int32_t pkt, tmp
    with nogil:
        for trial in range(n_trials):
            _for_trial(&s, seed, <uint64_t>(first_trial + trial))
            for i in range(M):
                miss[i] = i
                stamp[i] = 0
            n = M
            rounds = 0
            while n:
                rounds += 1
                k = m if m < n else n
                for vehicle in range(2):
                    for i in range(k):
                        j = i + <int>_below(&s, <uint64_t>(n - i))
                        tmp = miss[i]
                        miss[i] = miss[j]
                        miss[j] = tmp
                        stamp[miss[i]] = rounds
                w = 0
                for i in range(n):
                    pkt = miss[i]
                    if stamp[pkt] != rounds:
                        miss[w] = pkt
                        w += 1
                n = w
            out_v[trial] = rounds
    return out


def nc_rounds(int total_packets, int per_round, int field_exponent,
              int32_t[::1] exp_table, int32_t[::1] log_table,
              int64_t n_trials, master_seed, int64_t first_trial):
    """Round counts of ``n_trials`` network-coding trials.

    ``exp_table``/``log_table`` come from the FieldContext; the echelon
    update is forward-only (no back-reduction), which changes nothing about
    the rank sequence.
    """
    cdef int M = total_packets
    cdef int m = per_round
    cdef int q = field_exponent
    if M < 1 or m < 1 or m > M:
        raise ValueError("need 1 <= per_round <= total_packets")
    if q < 1 or q > 16:
        raise ValueError("field_exponent must be in [1, 16]")
    if n_trials < 0 or first_trial < 0:
        raise ValueError("n_trials and first_trial must be >= 0")
    cdef int ord1 = (1 << q) - 1
    cdef uint64_t mask = <uint64_t>ord1
    if log_table.shape[0] != (1 << q) or exp_table.shape[0] < 2 * ord1:
        raise ValueError("field table sizes do not match the exponent")
    cdef uint64_t seed = <uint64_t>(master_seed & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(n_trials, dtype=np.int64)
    basis_arr = np.zeros((M, M), dtype=np.int32)
    used_arr = np.zeros(M, dtype=np.uint8)
    row_arr = np.empty(M, dtype=np.int32)
    cdef int64_t[::1] out_v = out
    cdef int32_t[:, ::1] basis = basis_arr
    cdef unsigned char[::1] used = used_arr
    cdef int32_t[::1] row = row_arr
    cdef Stream s
    cdef int64_t trial
    cdef int rank, rounds, tx, col, jj, lf, li
    cdef int32_t v, bj, rj
    with nogil:
        for trial in range(n_trials):
            _for_trial(&s, seed, <uint64_t>(first_trial + trial))
            for col in range(M):
                used[col] = 0
            rank = 0
            rounds = 0
            while rank < M:
                rounds += 1
                for tx in range(2 * m):
                    for jj in range(M):
                        row[jj] = <int32_t>(_next(&s) & mask)
                    for col in range(M):
                        v = row[col]
                        if v == 0:
                            continue
                        if used[col]:
                            lf = log_table[v]
                            row[col] = 0
                            for jj in range(col + 1, M):
                                bj = basis[col, jj]
                                if bj != 0:
                                    row[jj] ^= exp_table[lf + log_table[bj]]
                        else:
                            li = ord1 - log_table[v]
                            basis[col, col] = 1
                            for jj in range(col + 1, M):
                                rj = row[jj]
                                basis[col, jj] = exp_table[li + log_table[rj]] if rj != 0 else 0
                            used[col] = 1
                            rank += 1
                            break
                    if rank == M:
                        break
            out_v[trial] = rounds
    return out
