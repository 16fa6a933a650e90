"""
Streams - Reproducible per-replicate random number substreams
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SeedStream:
    """Counter-based substream: Philox keyed by (master_seed, replicate_index)"""

    master_seed: int
    replicate_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if self.replicate_index < 0:
            raise ValueError(f"replicate_index must be >= 0, got {self.replicate_index}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.replicate_index,))
        return np.random.Generator(np.random.Philox(seq))

    def child(self, replicate_index: int) -> "SeedStream":
        return SeedStream(self.master_seed, replicate_index)
