"""Order-preserving parallel map shared by the multistart drivers."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "TENSNORM_THREADS"


def worker_count(workers: int | None = None) -> int:
    if workers is None:
        try:
            workers = int(os.environ.get(ENV_THREADS, "1"))
        except ValueError:
            workers = 1
    return max(1, int(workers))


def parallel_map(fn, items, workers: int | None = None) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order is preserved."""
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
