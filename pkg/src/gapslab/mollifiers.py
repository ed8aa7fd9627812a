"""The fixed smooth bumps: phi on R^d (support [-3,3]^d), psi on R (support [-1,1]).

Both are built from b(s) = exp(-1/(1 - s^2)) on (-1, 1).  The functions accept
complex arguments so that derivatives can be checked by the complex-step method.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

PHI_HALF_WIDTH = 3.0
PSI_HALF_WIDTH = 1.0


def _raw_bump(s):
    s = np.asarray(s)
    inside = np.abs(s.real) < 1.0
    safe = np.where(inside, s, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - safe * safe)), 0.0)


def _raw_bump_log_derivative(s):
    """d/ds log b(s) = -2s / (1 - s^2)^2 inside the support, 0 outside."""
    s = np.asarray(s)
    inside = np.abs(s.real) < 1.0
    safe = np.where(inside, s, 0.0)
    return np.where(inside, -2.0 * safe / (1.0 - safe * safe) ** 2, 0.0)


@lru_cache(maxsize=None)
def unit_bump_integral() -> float:
    """Integral of b over (-1, 1)."""
    value, _ = integrate.quad(lambda s: float(_raw_bump(s)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-12)
    return value


def bump(t, half_width: float):
    """L1-normalised bump supported on [-half_width, half_width]."""
    return _raw_bump(np.asarray(t) / half_width) / (half_width * unit_bump_integral())


def bump_derivative(t, half_width: float):
    s = np.asarray(t) / half_width
    return bump(t, half_width) * _raw_bump_log_derivative(s) / half_width


def phi_1d(t):
    return bump(t, PHI_HALF_WIDTH)


def psi_eval(t):
    """psi: even bump on [-1, 1] with integral 1."""
    return bump(t, PSI_HALF_WIDTH)


def psi_dilate(t, eta: float):
    """psi_eta(t) = psi(t / eta) / eta."""
    return psi_eval(np.asarray(t) / eta) / eta


def phi_eval(x):
    """phi(x) = prod_i phi_1d(x_i), evaluated along the last axis."""
    x = np.asarray(x)
    return np.prod(phi_1d(x), axis=-1)


def grad_phi(x):
    x = np.asarray(x)
    s = x / PHI_HALF_WIDTH
    return phi_eval(x)[..., None] * _raw_bump_log_derivative(s) / PHI_HALF_WIDTH


def rho_eval(x):
    """rho(x) = d phi(x) + grad phi(x) . x."""
    x = np.asarray(x)
    d = x.shape[-1]
    s = x / PHI_HALF_WIDTH
    return phi_eval(x) * (d + np.sum(s * _raw_bump_log_derivative(s), axis=-1))


def v_eval(x):
    """The vector field v(x) = phi(x) x, whose divergence is rho."""
    x = np.asarray(x)
    return phi_eval(x)[..., None] * x


def dilate(f, x, scale: float):
    """f_scale(x) = scale^(-d) f(x / scale) for a function of the last axis."""
    x = np.asarray(x)
    return f(x / scale) / scale ** x.shape[-1]


def sample_bump(rng: np.random.Generator, size, half_width: float = PHI_HALF_WIDTH) -> np.ndarray:
    """Independent draws from the normalised bump by rejection from the uniform law."""
    size = (size,) if np.isscalar(size) else tuple(size)
    total = int(np.prod(size))
    out = np.empty(total)
    filled = 0
    peak = np.exp(-1.0)
    while filled < total:
        want = total - filled
        batch = int(want / 0.55) + 16
        s = rng.uniform(-1.0, 1.0, batch)
        u = rng.uniform(0.0, peak, batch)
        kept = s[u < _raw_bump(s)][:want]
        out[filled:filled + kept.size] = kept
        filled += kept.size
    return (half_width * out).reshape(size)


@dataclass(frozen=True)
class MollifierPair:
    """phi on R^d and psi on R, with the derived rho and v."""

    d: int

    def phi(self, x):
        return phi_eval(self._check(x))

    def psi(self, t):
        return psi_eval(t)

    def rho(self, x):
        return rho_eval(self._check(x))

    def v(self, x):
        return v_eval(self._check(x))

    def grad_phi(self, x):
        return grad_phi(self._check(x))

    def sample_phi(self, rng: np.random.Generator, m: int) -> np.ndarray:
        return sample_bump(rng, (m, self.d))

    def _check(self, x):
        x = np.asarray(x)
        if x.shape[-1] != self.d:
            raise ValueError(f"expected points of dimension {self.d}")
        return x
