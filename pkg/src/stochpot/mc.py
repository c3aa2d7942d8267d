"""Monte Carlo plumbing: counter-based streams, worker pools, batch means.

Sample ``i`` of a run with seed ``s`` always draws from the Philox stream
keyed by ``(s, i)``.  Work is split into fixed-size chunks whose boundaries do
not depend on the number of workers, and chunk results are reduced in chunk
order, so every statistic is bit-identical for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

_MASK64 = (1 << 64) - 1
DEFAULT_CHUNK = 1000
DEFAULT_BATCHES = 100


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for sample ``index`` of a run seeded with ``seed``."""
    key = ((int(seed) & _MASK64) << 64) | (int(index) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, stream: int) -> int:
    """Independent 64-bit seed for sub-stream ``stream`` of ``seed``."""
    return int(np.random.SeedSequence([int(seed) & _MASK64, int(stream)]).generate_state(1, np.uint64)[0])


def standard_normals(seed: int, start: int, stop: int, size: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the per-sample standard normal table."""
    out = np.empty((stop - start, size))
    for row, i in enumerate(range(start, stop)):
        out[row] = sample_rng(seed, i).standard_normal(size)
    return out


def worker_count(workers: int | None = None) -> int:
    """Resolve the worker count; ``STOCHPOT_THREADS`` caps it when set."""
    env = os.environ.get("STOCHPOT_THREADS", "").strip()
    cap = int(env) if env else None
    if workers is None:
        workers = cap or os.cpu_count() or 1
    elif cap is not None:
        workers = min(int(workers), cap)
    return max(1, int(workers))


def chunk_bounds(n_items: int, chunk: int = DEFAULT_CHUNK) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, n_items)) for lo in range(0, n_items, chunk)]


def ordered_map(func: Callable[[int, int], np.ndarray], n_items: int,
                chunk: int = DEFAULT_CHUNK, workers: int | None = None) -> np.ndarray:
    """Apply ``func(start, stop)`` over fixed chunks and concatenate in order."""
    bounds = chunk_bounds(n_items, chunk)
    nw = min(worker_count(workers), max(1, len(bounds)))
    if nw == 1:
        parts = [func(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            parts = list(pool.map(lambda b: func(*b), bounds))
    return np.concatenate(parts, axis=0)


def batch_means(values: Sequence[float] | np.ndarray,
                n_batches: int = DEFAULT_BATCHES) -> tuple[float, float]:
    """Mean and batch-means standard error of a sample sequence.

    The sequence is split into ``n_batches`` contiguous batches; the standard
    error is ``std(batch means, ddof=1) / sqrt(n_batches)``.

    Parameters
    ----------
    values : array_like, shape (n,) or (n, k)
        Per-sample values; columns are treated independently.
    n_batches : int
        Number of batches, reduced to ``n`` if fewer samples are available.

    Returns
    -------
    mean, stderr : float or ndarray
    """
    x = np.asarray(values, dtype=float)
    n = x.shape[0]
    if n == 0:
        raise ValueError("batch_means needs at least one sample")
    mean = x.mean(axis=0)
    nb = min(n_batches, n)
    if nb < 2:
        return mean, np.full_like(np.asarray(mean), np.nan)[()]
    means = np.stack([b.mean(axis=0) for b in np.array_split(x, nb, axis=0)])
    stderr = means.std(axis=0, ddof=1) / np.sqrt(nb)
    return mean, stderr
