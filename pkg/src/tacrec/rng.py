"""Seeded pseudo-randomness for the whole toolkit.

Everything random in the pipeline (dataset shuffles, weight init, dropout
masks, synthetic corpora) is drawn from splitmix64 so results are
reproducible bit-for-bit from a single 64-bit seed, with no dependency on
platform RNG state.  splitmix64 is counter-based: output ``i`` is a mix of
``seed + (i+1)*GOLDEN``, which lets us vectorize draws with numpy while the
scalar path stays plain Python integers.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """The splitmix64 output finalizer on a 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Sequential splitmix64 stream over a seed.

    ``split`` derives an independent child stream; it is used to give each
    pipeline stage (shuffle, init, dropout) its own stream so consumption in
    one stage cannot shift another.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK
        self._count = 0

    def next_u64(self) -> int:
        self._count += 1
        return mix64(self._state + self._count * _GOLDEN)

    def next_u64s(self, n: int) -> np.ndarray:
        """Vectorized: the next ``n`` outputs as a uint64 array."""
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        base = np.uint64(self._state)
        golden = np.uint64(_GOLDEN)
        return _mix64_array(base + idx * golden)

    def next_float(self) -> float:
        # 53 high bits -> double in [0, 1)
        return (self.next_u64() >> 11) * 2.0**-53

    def next_floats(self, n: int) -> np.ndarray:
        return (self.next_u64s(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def next_below(self, bound: int) -> int:
        """Integer in [0, bound); modulo bias is negligible for bound << 2^64."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        """Shuffled list of range(n)."""
        items = list(range(n))
        self.shuffle(items)
        return items

    def split(self, tag: int) -> "SplitMix64":
        """Child stream keyed by ``tag``, independent of this stream's position."""
        return SplitMix64(mix64(self._state ^ mix64(tag)))
