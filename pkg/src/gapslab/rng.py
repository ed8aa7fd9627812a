"""Counter-based random streams and the chunked Monte Carlo driver.

Every chunk of a Monte Carlo run draws from its own Philox stream keyed by
``(seed, chunk index)``, and chunk results are combined in chunk order.  The
outcome therefore depends only on the seed and the chunk size, never on how
many workers evaluated the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

MASK64 = (1 << 64) - 1
DEFAULT_CHUNK = 1 << 16


@dataclass(frozen=True)
class SeedStream:
    """A reproducible random stream identified by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value) & MASK64)

    def generator(self) -> np.random.Generator:
        key = (self.stream_id << 64) | self.seed
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, stream_id: int) -> "SeedStream":
        return SeedStream(self.seed, stream_id)


@dataclass(frozen=True)
class MeanEstimate:
    """Column-wise sample means with standard errors."""

    mean: np.ndarray
    stderr: np.ndarray
    samples: int


def chunk_sizes(samples: int, chunk_size: int = DEFAULT_CHUNK) -> list[int]:
    if samples <= 0:
        raise ValueError("number of samples must be positive")
    if chunk_size <= 0:
        raise ValueError("chunk_size must be positive")
    full, rest = divmod(samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def map_ordered(func: Callable, items: list, workers: int = 1) -> list:
    """Apply ``func`` to ``items`` on a thread pool, returning results in input order."""
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def mc_mean(
    kernel: Callable[[np.random.Generator, int], np.ndarray],
    samples: int,
    seed: int,
    *,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> MeanEstimate:
    """Average per-sample values produced by ``kernel`` over ``samples`` draws.

    ``kernel(rng, m)`` returns an array of shape ``(m,)`` or ``(m, k)``.  The
    standard error of each column is the sample standard deviation over
    ``sqrt(samples)``.
    """
    sizes = chunk_sizes(samples, chunk_size)

    def work(index: int) -> tuple[np.ndarray, np.ndarray]:
        rng = SeedStream(seed, index).generator()
        values = np.asarray(kernel(rng, sizes[index]), dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        return values.sum(axis=0), np.square(values).sum(axis=0)

    parts = map_ordered(work, list(range(len(sizes))), workers)
    total = np.zeros_like(parts[0][0])
    total_sq = np.zeros_like(parts[0][1])
    for s, sq in parts:
        total = total + s
        total_sq = total_sq + sq
    mean = total / samples
    if samples > 1:
        var = np.maximum(total_sq - total * mean, 0.0) / (samples - 1)
    else:
        var = np.zeros_like(mean)
    return MeanEstimate(mean, np.sqrt(var / samples), samples)


def combined_stderr(*errors: float) -> float:
    return math.sqrt(sum(e * e for e in errors))
