"""Small shared helpers."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def default_jobs() -> int:
    return os.cpu_count() or 1


def parallel_map(fn, items, jobs: int | None = None) -> list:
    """Map preserving input order; jobs=1 stays single-threaded.

    Work must be pure per item so the output is independent of scheduling.
    """
    items = list(items)
    jobs = jobs or default_jobs()
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
