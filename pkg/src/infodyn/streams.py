"""Seeded random streams and schedule-independent parallel execution.

Every stochastic routine takes a ``numpy.random.Generator``.  Routines that
split work into chunks derive one child stream per chunk with
``Generator.spawn``, so the numbers each chunk sees depend only on the master
stream and the chunk index, never on how many threads run them.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

from .errors import InvalidParameter

T = TypeVar("T")
R = TypeVar("R")

_default_threads = 1


def make_stream(seed: int | np.random.SeedSequence | np.random.Generator | None) -> np.random.Generator:
    """Return a Generator for ``seed``; an existing Generator is passed through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def substreams(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    return rng.spawn(n)


def set_default_threads(n: int) -> None:
    """Set the worker count used when a routine is called with ``threads=None``.

    ``0`` means one worker per CPU.
    """
    global _default_threads
    if n < 0:
        raise InvalidParameter("thread count must be >= 0")
    _default_threads = n


def resolve_threads(threads: int | None) -> int:
    n = _default_threads if threads is None else threads
    if n < 0:
        raise InvalidParameter("thread count must be >= 0")
    if n == 0:
        n = os.cpu_count() or 1
    return n


def chunk_sizes(total: int, chunk: int) -> list[int]:
    """Split ``total`` items into fixed-size chunks (last one may be short)."""
    if total < 0 or chunk < 1:
        raise InvalidParameter("total must be >= 0 and chunk >= 1")
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int | None = None) -> list[R]:
    """Map ``fn`` over ``items``, returning results in input order."""
    n = resolve_threads(threads)
    if n == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
