"""The Gaussian g(x) = exp(-pi |x|^2), its derivatives, dilates and identities.

Kernels are L1-normalised dilates f_s(x) = s^(-d) f(x / s).  Kinds:

* ``g``: g itself
* ``h``: h^(l) = d/dx_l g
* ``kl``: k^(l) = d^2/dx_l^2 g
* ``k``: k = Laplacian of g
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, signal

KINDS = ("g", "h", "kl", "k")
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GaussianKernel:
    kind: str
    scale: float = 1.0
    axis: int = 1
    d: int = 1

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; choose from {KINDS}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.kind in ("h", "kl") and not 1 <= self.axis <= self.d:
            raise ValueError(f"axis must lie in 1..{self.d}")

    def __call__(self, x) -> np.ndarray:
        return kernel_eval(self, x)

    def ft(self, xi) -> np.ndarray:
        return kernel_ft(self, xi)


def _points(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != d:
        raise ValueError(f"expected points of dimension {d}")
    return x


def kernel_eval(kernel: GaussianKernel, x) -> np.ndarray:
    """Analytic value of the dilated kernel at points ``x`` (last axis = coordinates)."""
    d, s = kernel.d, kernel.scale
    u = _points(x, d) / s
    r2 = np.sum(u * u, axis=-1)
    base = np.exp(-math.pi * r2)
    if kernel.kind == "g":
        val = base
    elif kernel.kind == "h":
        val = -TWO_PI * u[..., kernel.axis - 1] * base
    elif kernel.kind == "kl":
        ul = u[..., kernel.axis - 1]
        val = (4 * math.pi ** 2 * ul * ul - TWO_PI) * base
    else:
        val = (4 * math.pi ** 2 * r2 - TWO_PI * d) * base
    return val / s ** d


def kernel_ft(kernel: GaussianKernel, xi) -> np.ndarray:
    """Analytic Fourier transform, with the convention f^(xi) = int f(x) exp(-2 pi i x.xi) dx."""
    v = _points(xi, kernel.d) * kernel.scale
    r2 = np.sum(v * v, axis=-1)
    base = np.exp(-math.pi * r2)
    if kernel.kind == "g":
        return base.astype(complex)
    if kernel.kind == "h":
        return 1j * TWO_PI * v[..., kernel.axis - 1] * base
    if kernel.kind == "kl":
        vl = v[..., kernel.axis - 1]
        return (-4 * math.pi ** 2 * vl * vl * base).astype(complex)
    return (-4 * math.pi ** 2 * r2 * base).astype(complex)


def _grid(half_width: float, points: int) -> tuple[np.ndarray, float]:
    step = 2.0 * half_width / points
    return -half_width + step * np.arange(points), step


def _mesh(axis: np.ndarray, d: int) -> np.ndarray:
    return np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)


def _kernels(d: int, scale: float = 1.0) -> list[GaussianKernel]:
    out = [GaussianKernel("g", scale, 1, d), GaussianKernel("k", scale, 1, d)]
    for l in range(1, d + 1):
        out += [GaussianKernel("h", scale, l, d), GaussianKernel("kl", scale, l, d)]
    return out


def default_grid(d: int) -> int:
    return 4096 if d == 1 else 512


def verify_ft_pairs(d: int = 1, grid: int | None = None, half_width: float = 16.0) -> float:
    """Max |DFT of sampled kernel - analytic transform| over all kinds and axes."""
    if d not in (1, 2):
        raise ValueError("d must be 1 or 2")
    grid = grid or default_grid(d)
    x, step = _grid(half_width, grid)
    if step > 0.25:
        raise ValueError(f"grid too coarse: spacing {step:.3g} exceeds 0.25 for unit-scale kernels")
    freqs = np.fft.fftfreq(grid, d=step)
    pts = _mesh(x, d)
    xi = _mesh(freqs, d)
    # shift from x_0 = -half_width to the origin
    phase = np.exp(-2j * math.pi * (-half_width) * np.sum(xi, axis=-1))
    worst = 0.0
    for ker in _kernels(d):
        approx = np.fft.fftn(kernel_eval(ker, pts)) * step ** d * phase
        worst = max(worst, float(np.max(np.abs(approx - kernel_ft(ker, xi)))))
    return worst


def _fft_convolve(f: np.ndarray, g: np.ndarray, step: float, d: int) -> np.ndarray:
    """Linear convolution of two grids sampled on the same centred grid, returned on that grid."""
    full = signal.fftconvolve(f, g, mode="full") * step ** d
    n = f.shape[0]
    sl = tuple(slice(n // 2, n // 2 + n) for _ in range(d))
    return full[sl]


def convolution_pairs(a: float, b: float, d: int) -> list[tuple[GaussianKernel, GaussianKernel, float, GaussianKernel]]:
    """(left, right, coefficient, result) for left * right = coefficient * result."""
    c = math.hypot(a, b)
    pairs = [(GaussianKernel("g", a, 1, d), GaussianKernel("g", b, 1, d), 1.0, GaussianKernel("g", c, 1, d))]
    for l in range(1, d + 1):
        pairs += [
            (GaussianKernel("h", a, l, d), GaussianKernel("h", b, l, d), a * b / c ** 2, GaussianKernel("kl", c, l, d)),
            (GaussianKernel("h", a, l, d), GaussianKernel("g", b, 1, d), a / c, GaussianKernel("h", c, l, d)),
            (GaussianKernel("kl", a, l, d), GaussianKernel("g", b, 1, d), a ** 2 / c ** 2, GaussianKernel("kl", c, l, d)),
        ]
    return pairs


def verify_convolution_identities(a: float, b: float, d: int = 1, grid: int | None = None) -> float:
    """Max residual of the four Gaussian convolution identities, by FFT convolution.

    The domain half-width is 16 times the largest scale involved.
    """
    if not (a > 0 and b > 0):
        raise ValueError("scales must be positive")
    if d not in (1, 2):
        raise ValueError("d must be 1 or 2")
    grid = grid or default_grid(d)
    half_width = 16.0 * max(a, b, math.hypot(a, b))
    x, step = _grid(half_width, grid)
    if step > 0.25 * min(a, b):
        raise ValueError("grid too coarse for the requested scales")
    pts = _mesh(x, d)
    worst = 0.0
    for left, right, coef, result in convolution_pairs(a, b, d):
        conv = _fft_convolve(kernel_eval(left, pts), kernel_eval(right, pts), step, d)
        worst = max(worst, float(np.max(np.abs(conv - coef * kernel_eval(result, pts)))))
    return worst


def heat_equation_residual(t_grid, x_grid, d: int = 1, step: float = 1e-5) -> float:
    """max |d/dt g_t(x) - k_t(x) / (2 pi t)| with a central difference in t.

    ``x_grid`` is a 1-D array of coordinates; for d = 2 its tensor square is used.
    """
    x_axis = np.asarray(x_grid, dtype=float)
    pts = _mesh(x_axis, d) if d > 1 else x_axis[:, None]
    worst = 0.0
    for t in np.asarray(t_grid, dtype=float):
        if not t > step:
            raise ValueError("t must exceed the difference step")
        dg = (kernel_eval(GaussianKernel("g", t + step, 1, d), pts)
              - kernel_eval(GaussianKernel("g", t - step, 1, d), pts)) / (2 * step)
        rhs = kernel_eval(GaussianKernel("k", t, 1, d), pts) / (TWO_PI * t)
        worst = max(worst, float(np.max(np.abs(dg - rhs))))
    return worst


def domination_constant(d: int) -> float:
    """(1/2) pi^(-(d+3)/2) Gamma((d+3)/2)."""
    return 0.5 * math.pi ** (-(d + 3) / 2) * math.gamma((d + 3) / 2)


def beta_average(z_norm: float, d: int) -> float:
    """int_1^inf g_beta(z) d beta / beta^4 for |z| = z_norm."""
    f = lambda beta: beta ** (-d - 4) * math.exp(-math.pi * z_norm ** 2 / beta ** 2)
    if z_norm == 0:
        return 1.0 / (d + 3)
    # the integrand peaks near beta = |z| sqrt(2 pi / (d + 4)); split there
    peak = max(1.0, z_norm * math.sqrt(2 * math.pi / (d + 4)))
    first, _ = integrate.quad(f, 1.0, peak, epsabs=0, epsrel=1e-12, limit=200)
    second, _ = integrate.quad(f, peak, math.inf, epsabs=0, epsrel=1e-12, limit=200)
    return first + second


def domination_limit_check(d: int, radii=(10.0, 20.0, 40.0)) -> list[float]:
    """Relative deviation of |z|^(d+3) beta_average(|z|) from the domination constant."""
    c = domination_constant(d)
    return [abs(r ** (d + 3) * beta_average(r, d) / c - 1.0) for r in radii]
