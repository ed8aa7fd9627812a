"""Vectors, lp norms, experiment parameters and progression patterns."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def lp_norm(x, p: float) -> float | np.ndarray:
    """(sum |x_i|^p)^(1/p), taken along the last axis of ``x``."""
    if not p >= 1:
        raise ValueError(f"invalid exponent p={p!r}; need p >= 1")
    a = np.abs(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(a)):
        raise ValueError("lp_norm needs finite coordinates")
    if a.shape[-1:] == (0,):
        return 0.0 if a.ndim == 1 else np.zeros(a.shape[:-1])
    # scale by the largest entry so large p does not overflow
    top = a.max(axis=-1, keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    out = np.squeeze(safe, -1) * np.power(np.sum((a / safe) ** p, axis=-1), 1.0 / p)
    return float(out) if np.ndim(out) == 0 else out


def dimension_threshold_real(n: int, p: float) -> float:
    """The real number 2^(n+3) (n + p)."""
    if n < 3 or p < 1:
        raise ValueError("need n >= 3 and p >= 1")
    return float(2 ** (n + 3) * (n + p))


def dimension_threshold(n: int, p: float) -> int:
    """Smallest integer dimension at least 2^(n+3) (n + p)."""
    return math.ceil(dimension_threshold_real(n, p))


@dataclass(frozen=True)
class ExperimentParams:
    n: int = 3
    p: float = 2.0
    d: int = 2
    lam: float = 0.1
    eps: float = 1.0
    delta: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be an integer >= 1, got {self.d!r}")
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p!r}")
        for name in ("lam", "eps", "delta"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {value!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "seed", int(self.seed))


def ap_points(x, y, n: int) -> np.ndarray:
    """The n points x, x+y, ..., x+(n-1)y as rows of an array."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must have the same dimension")
    steps = np.arange(n, dtype=float).reshape((n,) + (1,) * x.ndim)
    return x + steps * y


def cube_vertices(x: Sequence, y: Sequence, r: Sequence[int]) -> np.ndarray:
    """Concatenated vertex (x_1 + r_1 y_1, ..., x_n + r_n y_n) of planar points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=int)
    if x.shape != y.shape or x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("x and y must be sequences of planar points of equal length")
    if r.shape != (x.shape[0],) or np.any((r != 0) & (r != 1)):
        raise ValueError("r must be a 0/1 vector with one entry per planar point")
    return (x + r[:, None] * y).reshape(-1)


def all_vertices(x: Sequence, y: Sequence) -> np.ndarray:
    """All 2^n cube vertices, row r listed in binary order of (r_1, ..., r_n)."""
    n = len(x)
    bits = ((np.arange(2 ** n)[:, None] >> np.arange(n - 1, -1, -1)) & 1)
    return np.array([cube_vertices(x, y, b) for b in bits])
