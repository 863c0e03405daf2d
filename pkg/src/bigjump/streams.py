"""Counter-based splittable random streams and deterministic reductions.

Every stochastic routine in this package draws from a `numpy` Generator
backed by Philox, a counter-based bit generator.  A stream is addressed by
a path ``(seed, *labels)``; the path is hashed into the 128-bit Philox key,
so any two distinct paths yield statistically independent streams and the
same path always reproduces the same draws.  Replication-level parallelism
partitions work into a fixed number of chunks (independent of the thread
count) and derives one sub-stream per chunk, so results are identical for
any degree of parallelism.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

#: Number of replication chunks used by all chunked estimators.  Fixed so
#: that results do not depend on the thread count.
N_CHUNKS = 64

T = TypeVar("T")


def stream_key(seed: int, *labels: object) -> tuple[int, int]:
    """Hash ``(seed, *labels)`` into a 128-bit Philox key (two uint64)."""
    text = repr((int(seed),) + tuple(str(x) for x in labels))
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=16).digest()
    return (
        int.from_bytes(digest[:8], "little"),
        int.from_bytes(digest[8:], "little"),
    )

def substream(seed: int, *labels: object) -> np.random.Generator:
    """Return the Generator addressed by ``(seed, *labels)``."""
    key = np.array(stream_key(seed, *labels), dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def spawn(rng: np.random.Generator, index: int) -> np.random.Generator:
    """Derive the ``index``-th independent sub-stream of ``rng``.

    Uses the bit generator's jump function, so the parent stream is left
    untouched and the derivation is purely a function of (stream, index).
    """
    return np.random.Generator(rng.bit_generator.jumped(index + 1))


def chunk_sizes(total: int, n_chunks: int = N_CHUNKS) -> list[int]:
    """Split ``total`` replications into a fixed balanced partition."""
    if total <= 0:
        raise ValueError("total must be positive")
    n_chunks = min(n_chunks, total)
    base, extra = divmod(total, n_chunks)
    return [base + (1 if i < extra else 0) for i in range(n_chunks)]


def run_chunks(
    worker: Callable[[int, int, np.random.Generator], T],
    total: int,
    rng: np.random.Generator,
    threads: int = 1,
    n_chunks: int = N_CHUNKS,
) -> list[T]:
    """Run ``worker(chunk_index, chunk_size, chunk_rng)`` over all chunks.

    The returned list is ordered by chunk index regardless of scheduling,
    which makes any subsequent fixed-order reduction deterministic.
    """
    sizes = chunk_sizes(total, n_chunks)
    rngs = [spawn(rng, i) for i in range(len(sizes))]
    if threads <= 1:
        return [worker(i, sizes[i], rngs[i]) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(len(sizes)), sizes, rngs))


def tree_sum(values: Sequence) -> object:
    """Sum values by a fixed-order pairwise tree.

    Deterministic for any thread count (inputs are already in chunk order)
    and numerically stable for long accumulations.
    """
    items = list(values)
    if not items:
        raise ValueError("tree_sum of empty sequence")
    while len(items) > 1:
        paired = []
        for i in range(0, len(items) - 1, 2):
            paired.append(items[i] + items[i + 1])
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]
