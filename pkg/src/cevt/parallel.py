"""Worker-count policy shared by the parallelizable stages.

The CEVT_THREADS environment variable caps the worker count; 0 or unset
means "auto" (one worker per CPU).  Results are always merged in input
order, so output bytes never depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    """Worker budget from CEVT_THREADS (0 = auto)."""
    raw = os.environ.get("CEVT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"CEVT_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError("CEVT_THREADS must be >= 0")
    if n == 0:
        return os.cpu_count() or 1
    return n


def run_parallel(fn, items, workers: int):
    """Map ``fn`` over ``items`` with up to ``workers`` threads, in order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
