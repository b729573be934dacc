"""Ordered fan-out over independent tasks."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

WORKERS_ENV = "HADAMARDOPT_WORKERS"


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def map_ordered(fn, items):
    """``[fn(i) for i in items]``, spread over threads when more than one worker is allowed."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
