"""Splittable 64-bit pseudo-random streams.

Experiments must be bit-reproducible for a given (master seed, trial index)
pair no matter how trials are partitioned across workers, and the compiled
kernels must consume randomness exactly like this reference.  A SplitMix64
generator with per-stream gamma (the SplittableRandom construction) is small
enough to replicate verbatim in C, which library generators are not.

All constants are the published SplitMix64 / SplittableRandom ones.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """MurmurHash3 64-bit finalizer."""
    z &= _MASK64
    z ^= z >> 33
    z = (z * 0xFF51AFD7ED558CCD) & _MASK64
    z ^= z >> 33
    z = (z * 0xC4CEB9FE1A85EC53) & _MASK64
    z ^= z >> 33
    return z


def _mix13(z: int) -> int:
    """Stafford variant-13 64-bit mixer (SplitMix64 output function)."""
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def _mix_gamma(z: int) -> int:
    """Derive an odd, bit-rich stream increment from a seed word."""
    z = _mix13(z) | 1
    if bin(z ^ (z >> 1)).count("1") < 24:
        z ^= 0xAAAAAAAAAAAAAAAA
    return z


class Stream:
    """One independent random stream.

    ``next_u64`` steps the state by the stream's gamma and mixes it;
    ``below(n)`` draws a uniform integer in ``[0, n)`` by masked rejection
    (rejection-free whenever ``n`` is a power of two).
    """

    __slots__ = ("_state", "_gamma")

    def __init__(self, state: int, gamma: int = GOLDEN_GAMMA) -> None:
        if gamma % 2 == 0:
            raise ValueError("stream gamma must be odd")
        self._state = state & _MASK64
        self._gamma = gamma & _MASK64

    @classmethod
    def from_seed(cls, seed: int) -> "Stream":
        """Top-level stream for a user-supplied seed of any size."""
        base = seed & _MASK64
        return cls(_mix64(base + GOLDEN_GAMMA), _mix_gamma(base + 2 * GOLDEN_GAMMA))

    @classmethod
    def for_trial(cls, master_seed: int, trial_index: int) -> "Stream":
        """Independent stream for one simulation trial.

        Streams are keyed by the absolute trial index, so any chunking of a
        trial range over workers reproduces the same per-trial draws.
        """
        if trial_index < 0:
            raise ValueError("trial_index must be >= 0")
        base = (master_seed + (2 * trial_index + 1) * GOLDEN_GAMMA) & _MASK64
        return cls(_mix64(base), _mix_gamma(base + GOLDEN_GAMMA))

    def next_u64(self) -> int:
        self._state = (self._state + self._gamma) & _MASK64
        return _mix13(self._state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n).  Draws nothing when n <= 1."""
        if n <= 1:
            if n < 1:
                raise ValueError("below() needs n >= 1")
            return 0
        mask = (1 << (n - 1).bit_length()) - 1
        while True:
            v = self.next_u64() & mask
            if v < n:
                return v
