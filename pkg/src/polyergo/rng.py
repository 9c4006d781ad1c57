"""Seeded counter-based random streams for reproducible, shardable trials."""

import numpy as np


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent Philox stream for (seed, shard index).

    Philox is counter-based: the 128-bit key (seed, index) fully determines
    the stream, so trial shards can run in any order or in parallel and still
    reproduce bit-for-bit.
    """
    key = (int(seed) << 64) | int(index)
    return np.random.Generator(np.random.Philox(key=key))


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussian samples."""
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)
