# dlab/utils/parallel.py

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Tuple, TypeVar
import logging
import os

logger = logging.getLogger("dlab")

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Thread count from DLAB_THREADS, all cores when unset"""
    from dlab.core.config import get_settings

    threads = get_settings().threads
    return threads if threads else (os.cpu_count() or 1)


def block_ranges(total: int, block_size: int) -> List[Tuple[int, int, int]]:
    """Split ``range(total)`` into (block_index, start, stop) triples"""
    return [
        (index, start, min(start + block_size, total))
        for index, start in enumerate(range(0, total, block_size))
    ]


def map_ordered(func: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """
    Map ``func`` over ``items`` on a thread pool

    Results come back in input order whatever the worker count, so any
    reduction over them is reproducible.
    """
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
