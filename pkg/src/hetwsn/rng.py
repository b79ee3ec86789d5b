"""Seeded uniform stream shared by the reference engine and the compiled kernel.

The stream is the sequence of doubles produced by ``numpy`` PCG64 for the
seed, drawn in blocks. Block boundaries do not change the sequence, so the
Python and compiled paths can hand the same buffer back and forth.
"""

from __future__ import annotations

import numpy as np

DEFAULT_BLOCK = 1 << 16


class RandomStream:
    def __init__(self, seed: int, block: int = DEFAULT_BLOCK):
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self._block = block
        self.buffer = np.empty(0, dtype=np.float64)
        self.pos = 0

    def ensure(self, k: int) -> None:
        """Make at least ``k`` unconsumed draws available in ``buffer[pos:]``."""
        remaining = len(self.buffer) - self.pos
        if remaining >= k:
            return
        fresh = self._gen.random(max(self._block, k - remaining))
        self.buffer = np.concatenate((self.buffer[self.pos:], fresh))
        self.pos = 0

    def random(self) -> float:
        if self.pos >= len(self.buffer):
            self.ensure(1)
        u = self.buffer[self.pos]
        self.pos += 1
        return float(u)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()
