"""Reproducible random substreams.

Every random draw in the package comes from a Philox4x64 counter-based
generator whose 128-bit key is ``(seed, splitmix64-fold(path))``.  A path is a
tuple of small integers or strings naming the consumer (matrix index, restart
index, trial index, ...), so substreams never depend on call order or on how
work is scheduled across threads.
"""

import zlib

import numpy as np

from .core import InputError

_MASK = (1 << 64) - 1


def splitmix64(z):
    """One round of the SplitMix64 finalizer (Steele, Lea, Flood 2014)."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _token(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode()) | (1 << 40)
    return int(part) & _MASK


def mix(*path):
    h = 0
    for part in path:
        h = splitmix64(h ^ _token(part))
    return h


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= _MASK:
        raise InputError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def substream(seed, *path):
    """Generator for the substream ``path`` of ``seed``."""
    key = np.array([check_seed(seed), mix(*path)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
