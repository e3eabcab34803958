"""Deterministic PRNG used for weight init and seeded experiment streams.

xoshiro256** with splitmix64 seeding. Pure-integer implementation so the
same seed produces the same stream on any platform or numpy version.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


def derive_seed(base: int, *salts: int) -> int:
    """Derive an independent 64-bit seed from a base seed and salt values."""
    state = base & _MASK64
    state, out = _splitmix64(state)
    for salt in salts:
        state = (state ^ (salt & _MASK64)) & _MASK64
        state, out = _splitmix64(state)
    return out


class Xoshiro256:
    """xoshiro256** generator, seeded from a single 64-bit integer."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        state = self.seed
        s = []
        for _ in range(4):
            state, word = _splitmix64(state)
            s.append(word)
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def uniform_array(self, shape, low: float, high: float) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        vals = [self.uniform(low, high) for _ in range(n)]
        return np.array(vals, dtype=np.float64).reshape(shape)

    def randint(self, low: int, high: int) -> int:
        """Integer uniform in [low, high] inclusive."""
        if high < low:
            raise ValueError("empty range")
        span = high - low + 1
        # Rejection sampling keeps the draw unbiased.
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % span)
        while True:
            v = self.next_u64()
            if v < limit:
                return low + v % span

    def choice(self, items):
        return items[self.randint(0, len(items) - 1)]
