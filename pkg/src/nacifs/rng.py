"""Counter-based random streams.

Every random draw is a pure function of ``(key, counter)``, so work can be
split across any number of threads without changing results. The same
mixing function is implemented in the compiled walker kernel; both must stay
bit-compatible.
"""
from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / 9007199254740992.0


def splitmix64(x: int) -> int:
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`splitmix64` over a ``uint64`` array (wrapping arithmetic)."""
    z = x + np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def walker_key(seed: int, index: int) -> int:
    return splitmix64((seed & MASK64) ^ splitmix64(index & MASK64))


def walker_keys(seed: int, indices: np.ndarray) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.uint64)
    return splitmix64_array(np.uint64(seed & MASK64) ^ splitmix64_array(idx))


def uniform(key: int, counter: int) -> float:
    """Uniform double in [0, 1) for draw number ``counter`` of stream ``key``."""
    return (splitmix64((key + counter * GOLDEN) & MASK64) >> 11) * INV_2_53


def uniform_array(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    x = keys + counters.astype(np.uint64) * np.uint64(GOLDEN)
    return (splitmix64_array(x) >> np.uint64(11)).astype(np.float64) * INV_2_53


def derive_seed(master: int, *labels) -> int:
    """Stable labeled sub-seed: sha256 over the master seed and the labels."""
    h = hashlib.sha256(str(int(master)).encode())
    for label in labels:
        h.update(b"\x00")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[:8], "little") & ((1 << 63) - 1)
