"""Optional thread fan-out, bounded by the LOLAB_THREADS environment variable.

Results always come back in submission order, so turning threads on or off
never changes any output, only wall-clock time.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "LOLAB_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_VAR, "1")
    try:
        count = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}")
    return max(1, count)


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
