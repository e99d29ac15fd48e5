"""Ordered process-pool map and a deterministic sum."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np


def default_workers() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def pmap(fn: Callable, items: Iterable, workers: int = 1, chunksize: int = 8) -> list:
    """``[fn(x) for x in items]``, spread over ``workers`` processes, order kept."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def tree_sum(values: Sequence) -> complex | float:
    """Pairwise sum in a fixed order, independent of how the values were produced."""
    vals = list(values)
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def tree_mean(values: Sequence) -> float:
    arr = np.asarray(values)
    return tree_sum(list(arr)) / len(arr)
