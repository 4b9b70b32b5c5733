"""Deterministic random-stream derivation for chunked Monte Carlo runs.

Every sampling routine in the package draws from a Philox generator keyed by
(seed, label, chunk index).  Chunk boundaries are a pure function of the total
sample count and the chunk size, never of the worker count, so merged results
are bit-identical however the chunks are scheduled.
"""

from __future__ import annotations

import zlib

import numpy as np

# Fixed chunk width for path simulation; must not depend on worker count.
DEFAULT_CHUNK_SIZE = 262_144


def stream(seed: int, label: str, *indices: int) -> np.random.Generator:
    """Return the Philox generator for one (seed, label, indices) cell.

    The label is folded through crc32 so distinct call sites get disjoint
    streams even for equal index tuples.
    """
    key = (zlib.crc32(label.encode("utf-8")),) + tuple(int(i) for i in indices)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def chunk_sizes(n: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[int]:
    """Partition ``n`` samples into fixed-width chunks (last one ragged)."""
    if n < 0:
        raise ValueError("sample count must be non-negative")
    if chunk_size <= 0:
        raise ValueError("chunk size must be positive")
    full, rest = divmod(int(n), int(chunk_size))
    sizes = [int(chunk_size)] * full
    if rest:
        sizes.append(rest)
    return sizes
