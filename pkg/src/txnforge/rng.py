"""Seed derivation and generator construction.

Every random draw in the package comes from numpy's PCG64 bit generator.
Child seeds (per agent, per isolation tree) are derived from a master seed
with the SplitMix64 finalizer, which is a bijection on 64-bit integers: two
distinct child ids always map to distinct seeds.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, child_id: int) -> int:
    """Seed for child stream ``child_id``: ``splitmix64(master XOR child_id)``."""
    return splitmix64((master_seed & MASK64) ^ (child_id & MASK64))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))
