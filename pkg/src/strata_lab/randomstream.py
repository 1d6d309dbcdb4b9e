"""Deterministic random streams keyed by (seed, stream id).

A :class:`RandomStream` is a cheap, immutable handle; each call to
:meth:`RandomStream.generator` returns a *fresh* generator seeded from
``(seed, key)``, so running the same operation twice on the same stream
reproduces the draws bit for bit.  Worker streams for parallel trials are
derived with :meth:`RandomStream.child`, never shared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RandomStream:
    seed: int
    key: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        """Fresh PCG64 generator for this (seed, key) pair."""
        seq = np.random.SeedSequence(self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, index: int) -> "RandomStream":
        """Derived stream for worker ``index``; deterministic and disjoint."""
        return RandomStream(self.seed, self.key + (int(index),))
