"""Seeding and worker-count helpers shared by the Monte Carlo modules.

All randomness flows through numpy's PCG64 bit generator. A stream is
addressed by ``SeedSequence(seed, spawn_key=key)``, so the numbers drawn for
block ``k`` of an experiment depend only on ``(seed, k)`` and never on how
blocks are distributed over workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "QFOUND_THREADS"
BLOCK_SIZE = 1 << 16


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 generator addressed by ``(seed, *key)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def blocks(n: int, size: int = BLOCK_SIZE) -> list[tuple[int, int, int]]:
    """Split ``n`` items into ``(block_index, start, stop)`` chunks."""
    return [(k, start, min(start + size, n)) for k, start in enumerate(range(0, n, size))]


def pmap(fn: Callable[[T], R], items: Sequence[T] | Iterable[T]) -> list[R]:
    """Order-preserving map over a thread pool capped by QFOUND_THREADS."""
    items = list(items)
    workers = min(worker_count(), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
