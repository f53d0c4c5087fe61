"""Process-pool fan-out for independent numerical tasks."""

import os
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")


def default_jobs() -> int:
    return os.cpu_count() or 1


def run_tasks(fn: Callable[[T], R], items: Iterable[T], jobs: int | None = 1) -> list[R]:
    """Map fn over items, in submission order. jobs > 1 uses worker processes."""
    items = list(items)
    jobs = default_jobs() if jobs is None else jobs
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        chunksize = max(1, len(items) // (4 * jobs))
        return list(pool.map(fn, items, chunksize=chunksize))
