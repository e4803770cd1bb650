"""Fully-specified deterministic PRNG used by the splits and phantom modules.

The generator is SplitMix64 (Steele et al., the same stream used as the
seeder in java.util.SplittableRandom): a 64-bit counter advanced by the
golden-gamma constant and finalized with two xor-shift multiplies. It is
seeded directly by the user-facing integer seed so that manifests and
phantom files are byte-identical across platforms and implementations.
All derived draws (uniform doubles, bounded ints, Fisher-Yates shuffles,
Box-Muller gaussians) are defined here in terms of the raw 64-bit stream.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Deterministic 64-bit generator with a fixed draw discipline.

    uniform doubles:  (next_u64() >> 11) * 2**-53, in [0, 1)
    bounded ints:     next_u64() % n  (bias < 2**-44 for n <= 2**20)
    shuffle:          Fisher-Yates from the last index down to 1
    gaussians:        Box-Muller on consecutive uniform pairs
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def randint_below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randint_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def gauss_array(self, n: int) -> np.ndarray:
        """n standard normals via Box-Muller; an odd n discards the spare."""
        pairs = (n + 1) // 2
        u = np.array([self.random() for _ in range(2 * pairs)], dtype=np.float64)
        u1 = 1.0 - u[0::2]  # shift to (0, 1] so log() stays finite
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * math.pi * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]
