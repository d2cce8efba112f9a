"""Deterministic, index-splittable random streams.

All randomness goes through numpy's Philox4x64 counter-based generator,
keyed by a :class:`numpy.random.SeedSequence` built from a 64-bit seed and
an integer spawn key. Streams with different keys are independent, so
replicate ``r`` of an experiment draws the same numbers no matter how work
is scheduled.

Permutation replicates use a cheaper counter split: replicate ``b`` of seed
``s`` reads Philox blocks whose most significant counter word is ``b``,
under a key derived once from ``SeedSequence(s)``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Tuple

import numpy as np

_HALF_ULP = 2.0 ** -54


class RngStream:
    def __init__(self, seed: int, key: Tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def split(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.key + (int(index),))

    def uniform(self, n: int) -> np.ndarray:
        """Draws strictly inside (0, 1)."""
        return self._gen.random(n) + _HALF_ULP

    def normal(self, n: int) -> np.ndarray:
        return self._gen.standard_normal(n)

    def bernoulli_half(self, n: int) -> np.ndarray:
        """Boolean array, True with probability 1/2."""
        return self._gen.integers(0, 2, size=n, dtype=np.int8).astype(bool)

    def derive_seed(self) -> int:
        """A 64-bit seed for a nested configuration (e.g. a test inside a replicate)."""
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        return int(ss.generate_state(1, np.uint64)[0])

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self.key})"


@lru_cache(maxsize=1024)
def _philox_key(seed: int) -> Tuple[int, int]:
    k = np.random.SeedSequence(int(seed)).generate_state(2, np.uint64)
    return int(k[0]), int(k[1])


def replicate_bits(seed: int, B: int, n: int) -> np.ndarray:
    """``(B, n)`` boolean array of fair coin flips; row ``b`` depends only on ``(seed, b)``."""
    words = -(-n // 64)
    bg = np.random.Philox(key=np.array(_philox_key(seed), dtype=np.uint64))
    state = bg.state
    raw = np.empty((B, words), dtype=np.uint64)
    for b in range(B):
        state["state"]["counter"] = np.array([0, 0, 0, b], dtype=np.uint64)
        state["buffer_pos"] = 4
        bg.state = state
        raw[b] = bg.random_raw(words)
    bits = np.unpackbits(raw.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :n].astype(bool)
