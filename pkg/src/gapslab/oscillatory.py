"""Oscillatory integrals from the U^n norm of 1[eta,3](x) exp(2 pi i u |x|^p).

For shifts h_1..h_{n-1} the inner integral is
    I(u) = int_a^b exp(2 pi i u phi(x)) dx,
    phi(x) = sum_r (-1)^(r_1+...+r_{n-1}) |x + r.h|^p,
with [a, b] the set of x for which every x + r.h lies in [eta, 3].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from gapslab.counting import loglog_slope
from gapslab.geometry import dimension_threshold
from gapslab.rng import map_ordered

GL_NODES = 10
NODES_PER_PERIOD = 20
FILON_ABOVE = 1e5
H_PANELS = 32
_PROFILE_POINTS = 4097


@lru_cache(maxsize=None)
def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(m)
    return (x + 1) / 2, w / 2


@dataclass(frozen=True)
class OscillatoryInstance:
    p: float
    n: int
    u: float
    shifts: tuple
    eta: float

    def __post_init__(self) -> None:
        shifts = tuple(float(h) for h in np.atleast_1d(self.shifts))
        object.__setattr__(self, "shifts", shifts)
        if self.n < 2 or len(shifts) != self.n - 1:
            raise ValueError("need n >= 2 and exactly n-1 shifts")
        if not 0 <= self.eta < 1:
            raise ValueError("eta must lie in [0, 1)")
        if self.p < 1:
            raise ValueError("p must be >= 1")

    @property
    def offsets(self) -> np.ndarray:
        """r.h for every r in {0,1}^(n-1)."""
        r = np.array(list(itertools.product((0, 1), repeat=self.n - 1)), dtype=float)
        return r @ np.asarray(self.shifts)

    @property
    def signs(self) -> np.ndarray:
        r = np.array(list(itertools.product((0, 1), repeat=self.n - 1)), dtype=int)
        return np.where(r.sum(axis=1) % 2 == 0, 1.0, -1.0)

    @property
    def a(self) -> float:
        return float(np.max(self.eta - self.offsets))

    @property
    def b(self) -> float:
        return float(np.min(3.0 - self.offsets))

    @property
    def active(self) -> bool:
        return self.a < self.b


def phase_eval(inst: OscillatoryInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    pts = np.abs(x[..., None] + inst.offsets)
    return np.sum(inst.signs * pts ** inst.p, axis=-1)


def phase_derivative(inst: OscillatoryInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    pts = x[..., None] + inst.offsets
    return np.sum(inst.signs * inst.p * np.sign(pts) * np.abs(pts) ** (inst.p - 1), axis=-1)


def phase_second_derivative(inst: OscillatoryInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    pts = np.abs(x[..., None] + inst.offsets)
    return np.sum(inst.signs * inst.p * (inst.p - 1) * pts ** (inst.p - 2), axis=-1)


def _panel_edges(inst: OscillatoryInstance, per_period: float) -> np.ndarray:
    """Panel edges such that u * phi varies by at most 1/per_period of a period per panel.

    Uses the map s(x) = per_period * u * V(x) + 8 (x - a)/(b - a), where V is the
    cumulative variation of phi, and cuts at integer values of s.
    """
    a, b = inst.a, inst.b
    xs = np.linspace(a, b, _PROFILE_POINTS)
    dphi = np.abs(phase_derivative(inst, xs))
    var = np.concatenate([[0.0], np.cumsum((dphi[1:] + dphi[:-1]) / 2 * np.diff(xs))])
    s = per_period * abs(inst.u) * var + 8.0 * (xs - a) / (b - a)
    count = int(math.ceil(s[-1])) + 1
    edges = np.interp(np.linspace(0.0, s[-1], count + 1), s, xs)
    edges[0], edges[-1] = a, b
    return edges


def _integrate_gl(inst: OscillatoryInstance) -> complex:
    # a 10-node rule on a panel spanning half a period is accurate to ~1e-9 relative
    edges = _panel_edges(inst, NODES_PER_PERIOD / GL_NODES)
    t, w = gauss_legendre(GL_NODES)
    width = np.diff(edges)
    x = edges[:-1, None] + width[:, None] * t
    vals = np.exp(2j * math.pi * inst.u * phase_eval(inst, x))
    return complex(np.sum(vals * w * width[:, None]))


def _integrate_filon(inst: OscillatoryInstance, phase_tol: float = 1e-6) -> complex:
    """Linear-phase Filon rule: phi interpolated linearly on each panel, integrated exactly."""
    a, b = inst.a, inst.b
    xs = np.linspace(a, b, _PROFILE_POINTS)
    curv = float(np.max(np.abs(phase_second_derivative(inst, xs))))
    # interpolation error of phi on a panel of width w is at most curv w^2 / 8
    w_max = math.sqrt(8 * phase_tol / (2 * math.pi * abs(inst.u) * max(curv, 1e-300)))
    count = max(8, int(math.ceil((b - a) / w_max)))
    edges = np.linspace(a, b, count + 1)
    ph = phase_eval(inst, edges)
    theta = 2 * math.pi * inst.u * np.diff(ph)
    small = np.abs(theta) < 1e-8
    safe = np.where(small, 1.0, theta)
    factor = np.where(small, 1 + 0.5j * theta, (np.exp(1j * safe) - 1) / (1j * safe))
    return complex(np.sum(np.diff(edges) * np.exp(2j * math.pi * inst.u * ph[:-1]) * factor))


def oscillatory_I(inst: OscillatoryInstance) -> complex:
    """int_a^b exp(2 pi i u phi(x)) dx, zero for inactive instances."""
    if not inst.active:
        return 0j
    if inst.u == 0:
        return complex(inst.b - inst.a)
    if abs(inst.u) > FILON_ABOVE:
        return _integrate_filon(inst)
    return _integrate_gl(inst)


def _h_rule(n: int, nodes: int, half_width: float = 3.0) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre rule on [-3, 3]^(n-1), split at 0 on every axis."""
    t, w = gauss_legendre(nodes)
    pts_1d = np.concatenate([-half_width + half_width * t, half_width * t])
    wts_1d = np.concatenate([half_width * w, half_width * w])
    pts = np.array(list(itertools.product(pts_1d, repeat=n - 1)))
    wts = np.prod(np.array(list(itertools.product(wts_1d, repeat=n - 1))), axis=1)
    return pts, wts


def un_1d_power(u: float, n: int, p: float, eta: float, *, nodes: int = 64, workers: int = 1) -> float:
    """int |I_h(u)|^2 dh over |h_i| <= 3, the 2^n-th power of the norm of 1[eta,3] e^(2 pi i u |x|^p)."""
    if n not in (2, 3):
        raise ValueError("only n in {2, 3} is supported")
    pts, wts = _h_rule(n, nodes)
    # the panel split is fixed so the reduction order does not depend on the worker count
    panels = np.array_split(np.arange(len(wts)), min(len(wts), H_PANELS))

    def panel_sum(idx: np.ndarray) -> float:
        total = 0.0
        for i in idx:
            val = oscillatory_I(OscillatoryInstance(p, n, u, tuple(pts[i]), eta))
            total += wts[i] * abs(val) ** 2
        return total

    return float(sum(map_ordered(panel_sum, panels, workers)))


def un_1d_oscillatory(u: float, n: int, p: float, eta: float, *, nodes: int = 64, workers: int = 1) -> float:
    """U^n norm of 1[eta,3](x) exp(2 pi i u |x|^p) on R."""
    return max(un_1d_power(u, n, p, eta, nodes=nodes, workers=workers), 0.0) ** (2.0 ** -n)


@dataclass(frozen=True)
class DecayFit:
    frequencies: tuple
    values: tuple
    exponent: float
    guaranteed_floor: float


def decay_fit(us, n: int, p: float, eta: float, *, nodes: int = 64, workers: int = 1) -> DecayFit:
    """Fit value ~ u^(-exponent) and report it next to the guaranteed floor 2/D(n,p).

    The floor is only defined for n >= 3 and is NaN otherwise.
    """
    us = tuple(float(u) for u in us)
    vals = tuple(un_1d_oscillatory(u, n, p, eta, nodes=nodes, workers=workers) for u in us)
    exponent = -loglog_slope(us, vals)
    floor = 2.0 / dimension_threshold(n, p) if n >= 3 else math.nan
    return DecayFit(us, vals, exponent, floor)
