"""Counter-based random substreams and an order-preserving worker pool.

Every stochastic task is addressed by ``(seed, *key)``; its generator is a
Philox stream keyed from that address, so the draws of a task do not depend
on which worker runs it or in what order.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

# stream purposes (first element of a key)
DATA = 0
BOUNDARY = 1
CHERNOFF = 2

# draws per substream block; fixed so results do not depend on worker count
BLOCK = 256


def substream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def blocks(total: int, size: int = BLOCK) -> list[tuple[int, int]]:
    """``(block_index, count)`` pairs covering ``total`` draws."""
    return [(j, min(size, total - j * size)) for j in range(-(-total // size))]


def default_threads() -> int:
    return max(1, int(os.environ.get("GRIDCS_THREADS", "1")))


def pmap(fn, items, threads: int | None = None) -> list:
    """``list(map(fn, items))``, optionally spread over worker processes."""
    items = list(items)
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))
