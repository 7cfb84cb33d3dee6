"""Reproducible random-stream management.

Every experiment is driven by one master seed. Independent sub-streams are
derived from (seed, tag...) key tuples via numpy's SeedSequence, so a given
trial block always sees the same stream no matter how work is scheduled
across threads. String tags are hashed with SHA-256 (stable across runs and
platforms, unlike the builtin hash).
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

__all__ = ["substream", "run_blocks", "DEFAULT_BLOCK"]

DEFAULT_BLOCK = 1 << 19  # trials per block; small enough to keep arrays in cache-friendly chunks


def _tag_to_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        if tag < 0:
            raise ValueError("stream tags must be nonnegative integers")
        return int(tag)
    if isinstance(tag, str):
        return int.from_bytes(hashlib.sha256(tag.encode()).digest()[:8], "big")
    raise TypeError(f"unsupported stream tag {tag!r}")


def substream(seed: int, *tags) -> np.random.Generator:
    """PCG64 generator keyed by (seed, tags...)."""
    entropy = [int(seed)] + [_tag_to_int(t) for t in tags]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def run_blocks(
    total: int,
    worker: Callable[[int, np.random.Generator], object],
    seed,
    tags: Sequence = (),
    block: int = DEFAULT_BLOCK,
    threads: int = 1,
) -> list:
    """Split `total` trials into fixed blocks and run `worker(n, rng)` per block.

    Results come back ordered by block index, so any reduction over them is
    independent of the number of threads. `seed` is either a master seed int
    (block b sees the stream keyed by (seed, *tags, b)) or a Generator, which
    is split into per-block children up front.
    """
    if total <= 0:
        raise ValueError("total trials must be positive")
    n_blocks = (total + block - 1) // block
    sizes = [min(block, total - b * block) for b in range(n_blocks)]
    if isinstance(seed, np.random.Generator):
        streams = seed.spawn(n_blocks)
    else:
        streams = None

    def run_one(b: int):
        rng = streams[b] if streams is not None else substream(seed, *tags, b)
        return worker(sizes[b], rng)

    if threads <= 1 or n_blocks == 1:
        return [run_one(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_one, range(n_blocks)))
