"""Deterministic 64-bit seedable random numbers (SplitMix64).

Used for all random draws so that experiment outputs are reproducible from a
recorded seed alone, independent of numpy version or platform.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream; next_u64 passes through the standard finalizer."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal_pair(self):
        """Two standard normals by Box-Muller."""
        u1 = self.uniform()
        while u1 <= 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        return r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)

    def complex_normals(self, n: int) -> np.ndarray:
        """n i.i.d. standard complex Gaussians (re and im each N(0, 1))."""
        out = np.empty(n, dtype=complex)
        for j in range(n):
            a, b = self.normal_pair()
            out[j] = complex(a, b)
        return out


def derive_seed(seed: int, *parts: int) -> int:
    """Stable per-task sub-seed: fold task labels through the stream."""
    mix = SplitMix64(seed)
    acc = mix.next_u64()
    for p in parts:
        mix.state ^= (p & _MASK) * 0x9E3779B97F4A7C15 & _MASK
        acc ^= mix.next_u64()
    return acc & _MASK
