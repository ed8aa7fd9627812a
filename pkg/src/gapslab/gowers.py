"""Gowers U^n norms on R^d: difference operators, grid sums, Monte Carlo, step functions.

||f||_{U^n}^{2^n} = int Delta_{h_n} ... Delta_{h_1} f(x) dx dh_1 ... dh_n
                  = int |int Delta_{h_{n-1}} ... Delta_{h_1} f(x) dx|^2 dh_1 ... dh_{n-1},
with (Delta_h f)(x) = f(x) conj(f(x + h)).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from gapslab.counting import EstimateWithError
from gapslab.rng import DEFAULT_CHUNK, mc_mean

GRID_TERM_LIMIT = 10 ** 8


@dataclass(frozen=True)
class FunctionOracle:
    """A complex function on R^d vanishing outside ``support_box`` = (lo, hi)."""

    dimension: int
    func: Callable[[np.ndarray], np.ndarray]
    support_box: tuple
    label: str = "f"

    def __post_init__(self) -> None:
        lo = np.asarray(self.support_box[0], dtype=float).reshape(self.dimension)
        hi = np.asarray(self.support_box[1], dtype=float).reshape(self.dimension)
        object.__setattr__(self, "support_box", (tuple(lo), tuple(hi)))

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.support_box[0])

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.support_box[1])

    @property
    def empty(self) -> bool:
        return bool(np.any(self.hi <= self.lo))

    def eval(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        if self.dimension == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        inside = np.all((pts >= self.lo) & (pts <= self.hi), axis=-1)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        if inside.any() and not self.empty:
            out[inside] = self.func(pts[inside])
        return out


def indicator(lo, hi, scale: float = 1.0) -> FunctionOracle:
    """scale * 1 of the box [lo, hi]."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    return FunctionOracle(lo.size, lambda x: np.full(x.shape[0], scale, dtype=complex), (lo, hi),
                          f"{scale}*1[{lo.tolist()},{hi.tolist()}]")


def gaussian_function(d: int = 1, half_width: float = 6.0) -> FunctionOracle:
    """exp(-pi |x|^2) cut off outside [-half_width, half_width]^d (the cut-off is below 1e-48)."""
    return FunctionOracle(d, lambda x: np.exp(-math.pi * np.sum(x * x, axis=-1)).astype(complex),
                          (np.full(d, -half_width), np.full(d, half_width)), "gaussian")


def dilate(f: FunctionOracle, lam: float) -> FunctionOracle:
    """f_lam(x) = lam^(-d) f(x / lam)."""
    d = f.dimension
    return FunctionOracle(d, lambda x: f.eval(x / lam) / lam ** d, (lam * f.lo, lam * f.hi), f"{f.label}_{lam}")


def delta_h(f: FunctionOracle, h) -> FunctionOracle:
    """(Delta_h f)(x) = f(x) conj(f(x + h)), supported on supp f intersected with (supp f - h)."""
    h = np.asarray(h, dtype=float).reshape(f.dimension)
    lo = np.maximum(f.lo, f.lo - h)
    hi = np.minimum(f.hi, f.hi - h)
    return FunctionOracle(f.dimension, lambda x: f.eval(x) * np.conj(f.eval(x + h)), (lo, hi),
                          f"D[{h.tolist()}]{f.label}")


def _shift_product(F: np.ndarray, k: tuple) -> np.ndarray:
    """Grid analogue of Delta_k: F[i] conj(F[i + k]) on the overlap of the index ranges."""
    a_sl, b_sl = [], []
    for kk, size in zip(k, F.shape):
        if abs(kk) >= size:
            return np.zeros((0,) * F.ndim, dtype=F.dtype)
        if kk >= 0:
            a_sl.append(slice(0, size - kk))
            b_sl.append(slice(kk, size))
        else:
            a_sl.append(slice(-kk, size))
            b_sl.append(slice(0, size + kk))
    return F[tuple(a_sl)] * np.conj(F[tuple(b_sl)])


def _autocorr_energy(F: np.ndarray) -> float:
    """sum over all offsets k of |sum_i F[i] conj(F[i+k])|^2, via FFT."""
    if F.size == 0:
        return 0.0
    shape = [2 * s - 1 for s in F.shape]
    sizes = [1 << (s - 1).bit_length() for s in shape]
    axes = list(range(F.ndim))
    spec = np.fft.fftn(F, sizes, axes=axes)
    corr = np.fft.ifftn(np.abs(spec) ** 2, axes=axes)
    return float(np.sum(np.abs(corr) ** 2))


def _grid_power(F: np.ndarray, levels: int) -> complex:
    """sum over lattice offsets of the grid version of int Delta_{k_levels} ... Delta_{k_1} F."""
    if F.size == 0:
        return 0.0
    if levels == 1:
        return abs(F.sum()) ** 2
    if levels == 2:
        return _autocorr_energy(F)
    total = 0.0
    ranges = [range(-(s - 1), s) for s in F.shape]
    for k in itertools.product(*ranges):
        G = _shift_product(F, k)
        if G.size and np.any(G):
            total += _grid_power(G, levels - 1)
    return total


def sample_grid(f: FunctionOracle, grid_step: float) -> tuple[np.ndarray, float]:
    """f at the centres of a grid of cells of side ``grid_step`` covering the support box."""
    counts = [max(1, int(round((b - a) / grid_step))) for a, b in zip(f.lo, f.hi)]
    axes = [a + (np.arange(c) + 0.5) * (b - a) / c for a, b, c in zip(f.lo, f.hi, counts)]
    steps = [(b - a) / c for a, b, c in zip(f.lo, f.hi, counts)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return f.eval(pts), float(np.prod(steps))


def un_norm_grid(f: FunctionOracle, n: int, grid_step: float) -> float:
    """Riemann-sum U^n norm on a cell-centred grid of spacing ``grid_step``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if f.empty:
        return 0.0
    F, cell = sample_grid(f, grid_step)
    # the last two levels are one FFT autocorrelation; each earlier level multiplies by the offset count
    offsets = float(np.prod([2 * s - 1 for s in F.shape]))
    terms = (offsets if n >= 2 else F.size) * offsets ** max(n - 2, 0)
    if terms > GRID_TERM_LIMIT:
        raise MemoryError(f"grid sum needs about {terms:.3g} terms, above the limit {GRID_TERM_LIMIT:.0e}")
    power = float(np.real(_grid_power(F, n))) * cell ** (n + 1)
    return max(power, 0.0) ** (2.0 ** -n)


@dataclass(frozen=True)
class GowersEstimate(EstimateWithError):
    power: float = 0.0
    power_stderr: float = 0.0
    clipped: bool = False
    imag_part: float = 0.0


def un_power_kernel(f: FunctionOracle, n: int):
    """Per-sample estimator of ||f||_{U^n}^{2^n}; returns (kernel, volume)."""
    d = f.dimension
    lo, hi = f.lo, f.hi
    width = hi - lo
    volume = float(np.prod(width) * np.prod(2 * width) ** n)
    vertices = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)

    def kernel(rng: np.random.Generator, m: int) -> np.ndarray:
        x = lo + width * rng.random((m, d))
        h = -width + 2 * width * rng.random((m, n, d))
        prod = np.ones(m, dtype=complex)
        for r in vertices:
            val = f.eval(x + np.einsum("j,mjd->md", r, h))
            prod *= np.conj(val) if int(r.sum()) % 2 else val
        return np.column_stack([prod.real, prod.imag]) * volume

    return kernel, volume


def un_norm_mc(f: FunctionOracle, n: int, samples: int, seed: int, *, workers: int = 1,
               chunk_size: int = DEFAULT_CHUNK) -> GowersEstimate:
    """Monte Carlo U^n norm: uniform x over the support box, h_i over its difference box."""
    if f.empty:
        return GowersEstimate(0.0, 0.0, samples, seed)
    kernel, _ = un_power_kernel(f, n)
    est = mc_mean(kernel, samples, seed, chunk_size=chunk_size, workers=workers)
    power, power_err = float(est.mean[0]), float(est.stderr[0])
    if power <= 0:
        return GowersEstimate(0.0, 0.0, samples, seed, None, power, power_err, True, float(est.mean[1]))
    root = power ** (2.0 ** -n)
    err = power_err * root / (2 ** n * power)
    return GowersEstimate(root, err, samples, seed, None, power, power_err, False, float(est.mean[1]))


@dataclass(frozen=True)
class StepFunction:
    """f = sum_i values[i] 1[start + i w, start + (i+1) w) on R."""

    values: tuple
    width: float
    start: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))
        if not self.width > 0 or not self.values:
            raise ValueError("need a positive cell width and at least one value")

    def oracle(self) -> FunctionOracle:
        vals = np.asarray(self.values)
        m = vals.size

        def func(x: np.ndarray) -> np.ndarray:
            idx = np.clip(np.floor((x[:, 0] - self.start) / self.width).astype(int), 0, m - 1)
            return vals[idx]

        return FunctionOracle(1, func, ((self.start,), (self.start + m * self.width,)), "step")

    def lq_norm(self, q: float) -> float:
        return float(np.sum(self.width * np.abs(np.asarray(self.values)) ** q) ** (1.0 / q))

    def __add__(self, other: "StepFunction") -> "StepFunction":
        if other.width != self.width or other.start != self.start or len(other.values) != len(self.values):
            raise ValueError("step functions must share their grid")
        return StepFunction(tuple(a + b for a, b in zip(self.values, other.values)), self.width, self.start)


def u2_step_exact(f: StepFunction) -> float:
    """Exact ||f||_{U^2} for a step function.

    The autocorrelation A(h) = int f(x) conj(f(x+h)) dx is linear between
    multiples of the cell width, so int |A|^2 dh is a finite sum.
    """
    c = np.asarray(f.values)
    w = f.width
    m = c.size
    full = np.correlate(c, c, mode="full")  # full[j] = sum_i c[i + (j - m + 1)] conj(c[i])
    # A_k = w sum_i c_i conj(c_{i+k}) for k = -(m-1) .. m-1
    A = w * np.conj(full)
    A = np.concatenate([[0.0], A, [0.0]])
    a, b = A[:-1], A[1:]
    power = float(np.sum(w * (np.abs(a) ** 2 + np.real(a * np.conj(b)) + np.abs(b) ** 2) / 3.0))
    return max(power, 0.0) ** 0.25
