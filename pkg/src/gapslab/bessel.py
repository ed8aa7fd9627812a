"""Bessel J0 from its power series and its Hankel asymptotic expansion."""

from __future__ import annotations

import math

import numpy as np

SERIES_LIMIT = 12.0
_SERIES_TERMS = 80


def _j0_series(x: float) -> float:
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    for k in range(1, _SERIES_TERMS):
        term *= q / (k * k)
        total += term
        if abs(term) < 1e-18 * max(1.0, abs(total)):
            break
    return total


def _j0_asymptotic(x: float) -> float:
    # P and Q from a_k = prod_{j<=k} (2j-1)^2 / (k! 8^k); stop at the smallest term
    p_sum, q_sum = 1.0, 0.0
    a = 1.0
    last = math.inf
    for k in range(1, 200):
        a *= (2 * k - 1) ** 2 / (8.0 * k * x)
        if a >= last:
            break
        last = a
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q_sum -= sign * a
        else:
            p_sum += sign * a
        if a < 1e-17:
            break
    chi = x - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p_sum * math.cos(chi) - q_sum * math.sin(chi))


def j0(x):
    """Bessel function of the first kind of order zero."""
    arr = np.abs(np.asarray(x, dtype=float))
    flat = arr.reshape(-1)
    out = np.array([_j0_series(v) if v <= SERIES_LIMIT else _j0_asymptotic(v) for v in flat])
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)
