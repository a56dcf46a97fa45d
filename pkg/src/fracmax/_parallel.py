"""Ordered parallel map over independent samples."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional

JOBS_ENV = "FRACMAX_JOBS"


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{JOBS_ENV} must be >= 1")
    return n


def ordered_map(fn: Callable, items: Iterable, jobs: Optional[int] = None) -> list:
    """``[fn(x) for x in items]``, fanned out over ``jobs`` processes.

    Results come back in input order whatever the worker count, so reports
    are identical for any ``jobs``.  ``fn`` must be a module-level function.
    """
    items = list(items)
    jobs = default_jobs() if jobs is None else int(jobs)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=chunk))
