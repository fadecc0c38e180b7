"""Deterministic random-stream derivation and a small parallel map.

Every Monte Carlo unit of work (a dataset cell, a sweep condition) gets its
own `numpy` Generator derived from the master seed plus a stable string key.
Streams are therefore independent of execution order and of the number of
worker threads, which is what makes parallel runs bit-reproducible.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def derived_rng(master_seed: int, tag: str, *key) -> np.random.Generator:
    """Generator for the work unit identified by (tag, *key).

    The key parts are canonicalized through str(), so callers must pass
    integers (e.g. milli-units for grid floats), never raw floats.
    """
    text = ",".join([tag] + [str(part) for part in key])
    digest = hashlib.sha256(text.encode("ascii")).digest()
    words = [int.from_bytes(digest[4 * i:4 * i + 4], "little") for i in range(4)]
    return np.random.default_rng(np.random.SeedSequence([int(master_seed)] + words))


def milli(value: float) -> int:
    """Grid coordinate canonicalized to an integer (1/1000 units)."""
    return int(round(1000.0 * float(value)))


def parallel_map(fn, items, threads: int = 1) -> list:
    """Map fn over items, optionally with a thread pool.

    Results come back in input order regardless of scheduling, so output is
    identical for any thread count.
    """
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
