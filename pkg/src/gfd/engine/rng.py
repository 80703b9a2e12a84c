"""Seeded random stream with a fixed generator and a draw counter.

The generator is numpy's PCG64 fed through ``SeedSequence([seed, *key])``;
identical (seed, key) give identical draws on every platform.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

ALGORITHM = "PCG64"


class RngStream:
    def __init__(self, seed: int, key: Sequence[int] = ()):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        self.algorithm = ALGORITHM
        self.position = 0
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, *self.key])))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={self.key}, position={self.position})"

    def child(self, *key: int) -> "RngStream":
        """Independent stream for a sub-task; does not advance this stream."""
        return RngStream(self.seed, self.key + tuple(key))

    def _count(self, size: Optional[int | tuple[int, ...]]) -> None:
        self.position += int(np.prod(size)) if size is not None else 1

    def normal(self, size: int | tuple[int, ...]) -> np.ndarray:
        self._count(size)
        return self._gen.standard_normal(size)

    def random(self, size: int | tuple[int, ...]) -> np.ndarray:
        self._count(size)
        return self._gen.random(size)

    def uniform(self, low: float, high: float, size: Optional[int | tuple[int, ...]] = None):
        self._count(size)
        return self._gen.uniform(low, high, size)

    def integers(self, low: int, high: int, size: Optional[int | tuple[int, ...]] = None):
        """Integers in ``[low, high)``."""
        self._count(size)
        return self._gen.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        self._count(n)
        return self._gen.permutation(n)
