"""Named random streams.

Every stream is a Philox (counter-based) generator keyed by a master seed and
a tuple of stream names, so path ``k`` of a run draws the same numbers no
matter how many workers run or in which order.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_word(part) -> int:
    digest = hashlib.sha256(repr(part).encode()).digest()
    return int.from_bytes(digest[:4], "little")


def derive_seed(seed: int, *key) -> int:
    """Stable 64-bit child seed for ``key`` under ``seed``."""
    text = f"{int(seed) & _MASK64}:" + ":".join(repr(k) for k in key)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def stream(seed: int, *key) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(_key_word(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
