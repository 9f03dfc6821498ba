"""Seed handling.

Every stochastic routine takes an :class:`RngSeed`, a (seed, stream)
pair.  Distinct pairs give statistically independent streams via
``numpy.random.SeedSequence``; the same pair always reproduces the same
draws.  Kernel-level generators (the JIT code uses the classic Mersenne
Twister) receive a 32-bit sub-seed derived from the same sequence, so
replications stay independent across streams and deterministic within
one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngSeed:
    """A reproducible random stream: 64-bit seed plus substream index."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in 64 bits")
        if not (0 <= int(self.stream) < 2**64):
            raise ValueError("stream must fit in 64 bits")

    def sequence(self, *tags: int) -> np.random.SeedSequence:
        return np.random.SeedSequence((int(self.seed), int(self.stream), *tags))

    def generator(self, *tags: int) -> np.random.Generator:
        """PCG64 generator for vectorized (non-kernel) sampling."""
        return np.random.Generator(np.random.PCG64(self.sequence(*tags)))

    def kernel_seed(self, *tags: int) -> int:
        """32-bit sub-seed for the Mersenne-Twister kernel RNG."""
        return int(self.sequence(*tags).generate_state(1, dtype=np.uint32)[0])

    def substream(self, offset: int) -> "RngSeed":
        return RngSeed(self.seed, self.stream + offset)
