"""Worker-pool plumbing behind the CLI's --threads flag.

Every parallelizable loop in the package accepts a ``mapper`` with the
builtin ``map`` contract: results come back in argument order. A thread pool
satisfies that contract too, so outputs are identical at any worker count;
the flag only changes wall-clock time.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

__all__ = ["thread_mapper"]


@contextmanager
def thread_mapper(threads: int | None):
    """Yield an order-preserving map callable capped at ``threads`` workers.

    ``None``, 0 or 1 yields the builtin ``map`` (no pool at all).
    """
    if threads is not None and threads < 0:
        raise ValueError("threads must be >= 0")
    if threads is None or threads <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield pool.map
