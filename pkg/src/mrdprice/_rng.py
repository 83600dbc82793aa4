"""Seeded counter-based generators with deterministic substreams."""
from __future__ import annotations

import numpy as np

DEFAULT_SEED = 20180521


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for ``seed`` and an optional substream path.

    The same (seed, stream) pair always yields the same sequence, and distinct
    stream paths are statistically independent (SeedSequence spawn keys).
    """
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))
