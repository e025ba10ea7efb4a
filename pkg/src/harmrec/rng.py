"""Deterministic 64-bit xorshift-family generator for noise draws.

The noise stream must be reproducible bit-for-bit from an integer seed on
any platform, so the generator is pinned here rather than delegated to a
library whose stream may change between versions.

Algorithm (all arithmetic mod 2^64):

1. State from seed: one splitmix64 step
       z = seed + 0x9E3779B97F4A7C15
       z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
       z = (z ^ (z >> 27)) * 0x94D049BB133111EB
       state = z ^ (z >> 31)
   and if the state comes out zero it is replaced by 0x9E3779B97F4A7C15.
2. Each draw advances xorshift64*:
       s ^= s >> 12;  s ^= s << 25;  s ^= s >> 27
       output = s * 0x2545F4914F6CDD1D
3. Uniform double in [0, 1): (output >> 11) * 2^-53.
4. Standard normal: Box-Muller on a uniform pair,
       z = sqrt(-2 ln u1) * cos(2 pi u2)
   with u1 clamped to at least 2^-53.

Test vectors (seed 42) are frozen in tests/test_rng.py and in the README.
"""

from __future__ import annotations

import math

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(seed: int) -> int:
    z = (seed + _GOLDEN) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


class Xorshift64Star:
    """xorshift64* stream seeded through splitmix64."""

    def __init__(self, seed: int):
        state = _splitmix64(int(seed) & _M64)
        self._s = state if state != 0 else _GOLDEN

    def next_u64(self) -> int:
        s = self._s
        s ^= s >> 12
        s = (s ^ (s << 25)) & _M64
        s ^= s >> 27
        self._s = s
        return (s * 0x2545F4914F6CDD1D) & _M64

    def uniform(self) -> float:
        """Uniform in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def uniform_symmetric(self) -> float:
        """Uniform in [-1, 1)."""
        return 2.0 * self.uniform() - 1.0

    def normal(self) -> float:
        """Standard normal via Box-Muller (consumes two uniforms)."""
        u1 = max(self.uniform(), 2.0 ** -53)
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
