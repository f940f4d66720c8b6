"""Counter-based random substreams.

Every stage of every Estimate_Prob call draws from its own Philox stream,
addressed by a path of integers below the root seed. Substreams are pure
functions of (seed, path), so results never depend on call order.
"""
from __future__ import annotations

import numpy as np

SeedLike = int | np.random.SeedSequence | None


def as_seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def substream(seed: SeedLike, *path: int) -> np.random.SeedSequence:
    seq = as_seed_sequence(seed)
    return np.random.SeedSequence(seq.entropy, spawn_key=tuple(seq.spawn_key) + tuple(path))


def generator(seed: SeedLike, *path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(substream(seed, *path)))
