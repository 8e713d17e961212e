"""Ordered chunk mapping over an optional thread pool.

Results are always combined in chunk order, so reductions do not depend on
the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

_THREADS = 1


def set_threads(n: int) -> None:
    global _THREADS
    _THREADS = max(1, int(n))


def get_threads() -> int:
    return _THREADS


def map_ordered(fn, items, threads: int | None = None) -> list:
    items = list(items)
    n = _THREADS if threads is None else max(1, int(threads))
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def chunk_sizes(n: int, chunk: int) -> list:
    return [min(chunk, n - i) for i in range(0, n, chunk)]


def chunk_generators(seed: int, n: int, chunk: int):
    """(size, Generator) per chunk; chunk i draws from child i of SeedSequence(seed)."""
    sizes = chunk_sizes(n, chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    return [(m, np.random.default_rng(ss)) for m, ss in zip(sizes, children)]
