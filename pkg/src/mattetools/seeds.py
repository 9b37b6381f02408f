"""Deterministic seed derivation for independent per-clip random streams.

``mix64`` is a SplitMix64-style avalanche mixer: the master seed and a
stream index are combined and passed through two xor-shift-multiply rounds,
so neighbouring indices yield statistically independent 64-bit seeds and
parallel generation order cannot affect any clip's content.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(seed: int, index: int) -> int:
    z = (seed + (index + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK
