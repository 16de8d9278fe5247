"""Order-preserving parallel map for independent work items.

Results are merged in submission order and every work item derives its own
seed from the master seed, so the jobs count never changes any output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def default_jobs() -> int:
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T],
                 jobs: int | None = None) -> list[R]:
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    items = list(items)
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))
