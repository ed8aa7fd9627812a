"""The lp-sphere measure sigma, its mollified dilates, and the planar circle measure.

sigma is probability-normalised.  The vague limit of psi_eta(||x||_p^p - 1) dx
is proportional to the cone measure of the lp ball, which is the law of
g / ||g||_p for i.i.d. g_i with density proportional to exp(-|t|^p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from gapslab.bessel import j0
from gapslab.geometry import lp_norm
from gapslab.mollifiers import psi_dilate, sample_bump, unit_bump_integral
from gapslab.rng import SeedStream

NORMALIZATION_NOTE = (
    "sigma is probability-normalised; the unnormalised limit measure has total mass "
    "(d/p)*vol(B_p^d), so counting values here equal those quantities divided by that mass"
)


def lp_ball_volume(p: float, d: int) -> float:
    return (2.0 * math.gamma(1.0 + 1.0 / p)) ** d / math.gamma(1.0 + d / p)


def sigma_limit_mass(p: float, d: int) -> float:
    """Total mass of the vague limit of psi_eta(||x||_p^p - 1) dx, namely (d/p) vol(B_p^d)."""
    return d / p * lp_ball_volume(p, d)


def sigma_draws(rng: np.random.Generator, p: float, d: int, m: int) -> np.ndarray:
    """m draws from the probability-normalised sigma on the unit lp sphere."""
    if not p >= 1 or d < 1:
        raise ValueError("need p >= 1 and d >= 1")
    mag = rng.standard_gamma(1.0 / p, size=(m, d)) ** (1.0 / p)
    sign = np.where(rng.random((m, d)) < 0.5, -1.0, 1.0)
    g = sign * mag
    norm = lp_norm(g, p)
    # an all-zero row has probability zero; redraw it anyway to stay on the sphere
    bad = ~(norm > 0)
    while bad.any():
        g[bad] = np.where(rng.random((bad.sum(), d)) < 0.5, -1.0, 1.0) * rng.standard_gamma(
            1.0 / p, size=(bad.sum(), d)) ** (1.0 / p)
        norm = lp_norm(g, p)
        bad = ~(norm > 0)
    return g / np.reshape(norm, (m, 1))


def circle_draws(rng: np.random.Generator, m: int) -> np.ndarray:
    theta = rng.uniform(0.0, 2.0 * math.pi, m)
    return np.column_stack([np.cos(theta), np.sin(theta)])


def sample_sigma(p: float, d: int, stream: SeedStream, size: int | None = None) -> np.ndarray:
    """Points on the lp unit sphere distributed as sigma; one vector if ``size`` is None."""
    out = sigma_draws(stream.generator(), p, d, 1 if size is None else size)
    return out[0] if size is None else out


def mollified_gap_draws(rng: np.random.Generator, p: float, d: int, lam: float, eps: float, m: int) -> np.ndarray:
    z = sigma_draws(rng, p, d, m)
    w = sample_bump(rng, (m, d))
    return lam * z + eps * lam * w


def sample_mollified_gap(p: float, d: int, lam: float, eps: float, stream: SeedStream,
                         size: int | None = None) -> np.ndarray:
    """y = lam z + eps lam w with z ~ sigma and w ~ phi; density sigma_lam * phi_(eps lam)."""
    if not (0 < lam <= 1 and 0 < eps <= 1):
        raise ValueError("lambda and eps must lie in (0, 1]")
    out = mollified_gap_draws(stream.generator(), p, d, lam, eps, 1 if size is None else size)
    return out[0] if size is None else out


def _psi_scalar(t: float) -> float:
    if abs(t) >= 1.0:
        return 0.0
    return math.exp(-1.0 / (1.0 - t * t)) / unit_bump_integral()


def sigma_eta_total_mass(p: float, d: int, eta: float, tol: float = 1e-10) -> float:
    """Integral over R^d of psi_eta(||x||_p^p - 1), by nested adaptive quadrature.

    The integral is 2^d times the integral over the positive orthant.  The last
    coordinate is traded for the shell variable tau = (||x||_p^p - 1) / eta,
    which turns the narrow bump into a unit-width one.
    """
    if d > 3 or d < 1:
        raise ValueError("quadrature is supported for 1 <= d <= 3")
    if not 0 < eta <= 0.5:
        raise ValueError("eta must lie in (0, 0.5]")
    worst = [0.0]

    def innermost(s: float) -> float:
        # integral over x >= 0 of psi_eta(s + x^p - 1) dx
        lo = max(-1.0, (s - 1.0) / eta)
        if lo >= 1.0:
            return 0.0
        alpha = 1.0 / p - 1.0
        if lo > -1.0:
            # (1 + eta tau - s)^alpha = eta^alpha (tau - lo)^alpha: algebraic endpoint weight
            f = lambda tau: _psi_scalar(tau) * eta ** alpha / p
            val, err = integrate.quad(f, lo, 1.0, weight="alg", wvar=(alpha, 0.0),
                                      epsabs=tol, epsrel=1e-10, limit=200)
        else:
            f = lambda tau: _psi_scalar(tau) * (1.0 + eta * tau - s) ** alpha / p
            val, err = integrate.quad(f, lo, 1.0, epsabs=tol, epsrel=1e-10, limit=200)
        worst[0] = max(worst[0], err)
        return val

    def layer(k: int, s: float) -> float:
        if k == 1:
            return innermost(s)
        top = 1.0 + eta - s
        if top <= 0:
            return 0.0
        hi = top ** (1.0 / p)
        low_t = 1.0 - eta - s
        f = lambda x: layer(k - 1, s + x ** p)
        pieces = [(0.0, low_t ** (1.0 / p)), (low_t ** (1.0 / p), hi)] if low_t > 0 else [(0.0, hi)]
        val = 0.0
        for a, b in pieces:
            v, e = integrate.quad(f, a, b, epsabs=tol, epsrel=1e-10, limit=200)
            val += v
            worst[0] = max(worst[0], e)
        return val

    total = 2 ** d * layer(d, 0.0)
    if worst[0] > 1e-6:
        raise ArithmeticError(f"quadrature did not converge; achieved tolerance {worst[0]:.3g}")
    return total


def sample_sigma_eta_rejection(p: float, d: int, eta: float, stream: SeedStream, size: int) -> np.ndarray:
    """Draws from the normalised density psi_eta(||x||_p^p - 1) by rejection.

    Proposals are uniform in the Euclidean annulus that contains the shell
    1 - eta <= ||x||_p^p <= 1 + eta.  Used as an independent oracle for sigma.
    """
    rng = stream.generator()
    ratio = d ** (1.0 / p - 0.5)
    u_min, u_max = min(1.0, ratio), max(1.0, ratio)
    r_lo = (1.0 - eta) ** (1.0 / p) / u_max
    r_hi = (1.0 + eta) ** (1.0 / p) / u_min
    peak = float(psi_dilate(0.0, eta))
    out = np.empty((size, d))
    filled = 0
    while filled < size:
        batch = 1 << 18
        u = rng.standard_normal((batch, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = (r_lo ** d + rng.random(batch) * (r_hi ** d - r_lo ** d)) ** (1.0 / d)
        x = u * r[:, None]
        dens = psi_dilate(np.sum(np.abs(x) ** p, axis=1) - 1.0, eta)
        kept = x[rng.random(batch) * peak < dens][: size - filled]
        out[filled:filled + len(kept)] = kept
        filled += len(kept)
    return out


def circle_ft(xi_norm):
    """Fourier transform of the uniform probability measure on the unit circle: J0(2 pi |xi|)."""
    xi = np.asarray(xi_norm, dtype=float)
    if np.any(xi < 0):
        raise ValueError("xi_norm must be nonnegative")
    return j0(2.0 * math.pi * xi)


def ft_decay_check(xi_max: float, grid: int) -> float:
    """max over an even grid on [0, xi_max] of |circle_ft(xi)| (1 + xi)^(1/2)."""
    if grid < 2:
        raise ValueError("grid must have at least 2 points")
    xi = np.linspace(0.0, xi_max, grid)
    return float(np.max(np.abs(circle_ft(xi)) * np.sqrt(1.0 + xi)))


@dataclass(frozen=True)
class SphereSampler:
    """Generator of sigma and its mollified dilates for fixed (p, d)."""

    p: float
    d: int

    @property
    def normalization(self) -> float:
        return sigma_limit_mass(self.p, self.d)

    def sigma(self, rng: np.random.Generator, m: int) -> np.ndarray:
        return sigma_draws(rng, self.p, self.d, m)

    def dilate(self, rng: np.random.Generator, m: int, lam: float) -> np.ndarray:
        return lam * sigma_draws(rng, self.p, self.d, m)

    def mollified(self, rng: np.random.Generator, m: int, lam: float, eps: float) -> np.ndarray:
        return mollified_gap_draws(rng, self.p, self.d, lam, eps, m)
