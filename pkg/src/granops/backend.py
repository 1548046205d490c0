"""Execution backends.

Every pixel kernel in granops writes a band of output rows ``[y0, y1)`` and
computes each output pixel with a fixed sequence of float operations, so the
result does not depend on how rows are split.  The ``reference`` backend
runs one band covering the whole image on the calling thread; the
``parallel`` backend splits rows into bands and runs them on a thread pool
(numpy releases the GIL inside its loops).
"""
from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from enum import Enum

import numpy as np


class BackendKind(str, Enum):
    REFERENCE = "reference"
    PARALLEL = "parallel"


_pools: dict[int, ThreadPoolExecutor] = {}
_pools_lock = threading.Lock()


def _pool(threads):
    with _pools_lock:
        pool = _pools.get(threads)
        if pool is None:
            pool = ThreadPoolExecutor(max_workers=threads, thread_name_prefix=f"granops{threads}")
            _pools[threads] = pool
        return pool


def max_threads() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


class Backend:
    """Row-band scheduler.

    Parameters
    ----------
    kind : {"reference", "parallel"}
    threads : int, optional
        Worker count for the parallel backend; defaults to the usable CPU count.
    bands_per_thread : int
        Row bands handed to each worker.  More than one band per thread keeps
        band seams exercised even with ``threads=1``.
    """

    def __init__(self, kind="reference", threads=None, bands_per_thread=4):
        self.kind = BackendKind(kind)
        self.threads = max(1, int(threads)) if threads else max_threads()
        self.bands_per_thread = max(1, int(bands_per_thread))

    def __repr__(self):
        if self.kind is BackendKind.REFERENCE:
            return "Backend('reference')"
        return f"Backend('parallel', threads={self.threads})"

    def bands(self, height):
        """Split ``range(height)`` into contiguous ``(y0, y1)`` bands."""
        if self.kind is BackendKind.REFERENCE:
            return [(0, height)]
        n = min(height, self.threads * self.bands_per_thread)
        edges = np.linspace(0, height, n + 1).round().astype(int)
        return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]

    def map(self, fn, items):
        items = list(items)
        if self.kind is BackendKind.REFERENCE or self.threads == 1 or len(items) == 1:
            return [fn(item) for item in items]
        return list(_pool(self.threads).map(fn, items))

    def run_rows(self, kernel, shape, dtype=np.float32):
        """Allocate an output of ``shape`` (z, y, x) and fill it band by band.

        ``kernel(out, y0, y1)`` must write ``out[:, y0:y1, :]`` and nothing else.
        """
        out = np.empty(shape, dtype=dtype)
        self.map(lambda band: kernel(out, *band), self.bands(shape[1]))
        return out


REFERENCE = Backend("reference")


def get_backend(backend=None, threads=None) -> Backend:
    if backend is None:
        return REFERENCE
    if isinstance(backend, Backend):
        return backend
    return Backend(backend, threads=threads)
