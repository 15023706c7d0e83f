"""Deterministic per-replica random streams.

Every replica draws from a Philox (counter-based) generator keyed by
``(master_seed, replica_index)`` through :class:`numpy.random.SeedSequence`,
so a replica's stream never depends on how many other replicas ran before it
or on which worker process ran it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    replica_index: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed <= _MAX_SEED:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.replica_index < 0:
            raise ValueError(f"replica_index must be nonnegative, got {self.replica_index}")

    def generator(self, stream: int = 0) -> np.random.Generator:
        """Return a fresh generator for this replica.

        ``stream`` selects an independent sub-stream of the same replica (used
        when one replica needs two unrelated sources, e.g. matrix entries and
        a deformation direction).
        """
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.replica_index, stream))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, offset: int) -> SeedSpec:
        return SeedSpec(self.master_seed, self.replica_index + offset)


def replica_seeds(master_seed: int, replicas: int, start: int = 0) -> list[SeedSpec]:
    return [SeedSpec(master_seed, i) for i in range(start, start + replicas)]
