"""Worker-count policy and deterministic RNG substreams."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def worker_count() -> int:
    """Number of parallel workers; capped by the PELL_THREADS env var.

    Results never depend on this value, only wall-clock time does.
    """
    cap = os.environ.get("PELL_THREADS")
    avail = os.cpu_count() or 1
    if cap is None:
        return min(4, avail)
    try:
        n = int(cap)
    except ValueError:
        return 1
    return max(1, min(n, avail))


def substream(seed, *indices) -> np.random.Generator:
    """Generator for an index-derived substream of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *map(int, indices)]))


def parallel_map(fn, items):
    """Order-preserving map over items, threaded when workers > 1."""
    items = list(items)
    w = worker_count()
    if w <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))
