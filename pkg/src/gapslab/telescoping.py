"""Numerical checks of the Gaussian telescoping identities at small instances.

* tilde identity: int_a^b sum_l sum_m K~_{l,m,t} dt/t = pi (M~_a - M~_b),
  using the closed forms K~ = -1/2 k^(l)_{sqrt2 t a_m}(u_m) prod_{j!=m} g_{sqrt2 t a_j}(u_j)
  and M~ = prod_j g_{sqrt2 t a_j}(u_j);
* full identity for n = 3, k = 2, d = 1, with the inner p-integrals done on a
  uniform grid (the integrands are Gaussians, so the trapezoid sum converges
  spectrally);
* the cube identity sum_m Theta_m = 2 pi (Xi_a - Xi_b) for finite unions of
  boxes, where every integral separates into one-dimensional double integrals
  with closed-form antiderivatives.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from gapslab.gaussian import GaussianKernel, kernel_eval
from gapslab.sets import SetOracle

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TelescopeInstance:
    """Parameters of one identity check.

    ``alphas`` holds (alpha_1, ..., alpha_{n-1}) for the tilde identity and
    (alpha, alpha_k, ..., alpha_{n-1}) for the full one.  Each evaluation
    point is (y, u_k, ..., u_{n-1}) with d-dimensional entries.
    """

    k_index: int
    d: int
    n: int
    alphas: tuple
    a: float
    b: float
    eval_points: tuple

    def __post_init__(self) -> None:
        if not 0 < self.a <= self.b:
            raise ValueError("need 0 < a <= b")
        if any(not al > 0 for al in self.alphas):
            raise ValueError("all alphas must be positive")
        if not 1 <= self.k_index <= self.n - 1:
            raise ValueError("k must lie in 1..n-1")


def _quad(f, a: float, b: float) -> float:
    if a == b:
        return 0.0
    val, err = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)
    if err > 1e-8:
        raise ArithmeticError(f"t-quadrature did not converge; achieved tolerance {err:.3g}")
    return val


def _vec(u, d: int) -> np.ndarray:
    return np.asarray(u, dtype=float).reshape(d)


def tilde_terms(alphas, us, t: float, d: int) -> tuple[float, float]:
    """(sum_l sum_m K~_{l,m,t}, M~_t) from the closed forms."""
    gs = [float(kernel_eval(GaussianKernel("g", SQRT2 * t * al, 1, d), u)) for al, u in zip(alphas, us)]
    m_val = math.prod(gs)
    total = 0.0
    for m, (al, u) in enumerate(zip(alphas, us)):
        rest = math.prod(g for j, g in enumerate(gs) if j != m)
        for l in range(1, d + 1):
            total += -0.5 * float(kernel_eval(GaussianKernel("kl", SQRT2 * t * al, l, d), u)) * rest
    return total, m_val


def verify_identity_tilde(inst: TelescopeInstance) -> float:
    """Max over evaluation points of |int_a^b sum K~ dt/t - pi (M~_a - M~_b)|."""
    if inst.d not in (1, 2) or inst.n > 4:
        raise ValueError("tilde identity check supports d in {1, 2} and n <= 4")
    if len(inst.alphas) != inst.n - 1:
        raise ValueError("need alphas (alpha_1, ..., alpha_{n-1})")
    worst = 0.0
    for point in inst.eval_points:
        us = [_vec(u, inst.d) for u in point[1:]]
        if len(us) != inst.n - 1:
            raise ValueError("each evaluation point needs (y, u_1, ..., u_{n-1})")
        lhs = _quad(lambda t: tilde_terms(inst.alphas, us, t, inst.d)[0] / t, inst.a, inst.b)
        rhs = math.pi * (tilde_terms(inst.alphas, us, inst.a, inst.d)[1]
                         - tilde_terms(inst.alphas, us, inst.b, inst.d)[1])
        worst = max(worst, abs(lhs - rhs))
    return worst


def l_prefactor(alpha: float, alphas_rest) -> float:
    """The coefficient -1/2 (1 + alpha^-2 sum alpha_m^2) in front of L."""
    return -0.5 * (1.0 + sum(a * a for a in alphas_rest) / alpha ** 2)


@dataclass(frozen=True)
class _PGrid:
    p: np.ndarray
    w: float


def _p_grid(y: float, u: float, smin: float, smax: float) -> _PGrid:
    lo = min(-y, 0.0, u) - 12.0 * smax
    hi = max(-y, 0.0, u) + 12.0 * smax
    step = smin / 10.0
    count = int(math.ceil((hi - lo) / step)) + 1
    return _PGrid(np.linspace(lo, hi, count), (hi - lo) / (count - 1))


def full_terms(alpha: float, alpha2: float, y: float, u: float, t: float, grid: _PGrid) -> tuple[float, float, float]:
    """(L_{2,1,t}, K_{2,1,2,t}, M_{2,t}) for n = 3, d = 1 by grid sums over p."""
    p = grid.p
    big, small = t * alpha, t * alpha2
    g_big = kernel_eval(GaussianKernel("g", big), y + p)
    k_big = kernel_eval(GaussianKernel("kl", big), y + p)
    g_p, g_q = kernel_eval(GaussianKernel("g", small), p), kernel_eval(GaussianKernel("g", small), u - p)
    h_p, h_q = kernel_eval(GaussianKernel("h", small), p), kernel_eval(GaussianKernel("h", small), u - p)
    # the integrands vanish to machine precision at both ends, so a plain sum is the trapezoid rule
    k_val = -float(np.sum(g_big * h_p * h_q)) * grid.w
    l_val = l_prefactor(alpha, [alpha2]) * float(np.sum(k_big * g_p * g_q)) * grid.w
    m_val = float(np.sum(g_big * g_p * g_q)) * grid.w
    return l_val, k_val, m_val


def verify_identity_full(inst: TelescopeInstance) -> float:
    """Max residual of int_a^b (L + K) dt/t = pi (M_a - M_b) for n = 3, k = 2, d = 1."""
    if inst.d != 1 or inst.n != 3 or inst.k_index != 2:
        raise ValueError("full identity check supports d = 1, n = 3, k = 2")
    if len(inst.alphas) != 2:
        raise ValueError("need alphas (alpha, alpha_2)")
    alpha, alpha2 = inst.alphas
    worst = 0.0
    for point in inst.eval_points:
        y, u = (float(np.asarray(v).reshape(-1)[0]) for v in point)
        grid = _p_grid(y, u, inst.a * min(alpha, alpha2), inst.b * max(alpha, alpha2))

        def integrand(t: float) -> float:
            l_val, k_val, _ = full_terms(alpha, alpha2, y, u, t, grid)
            return (l_val + k_val) / t

        lhs = _quad(integrand, inst.a, inst.b)
        rhs = math.pi * (full_terms(alpha, alpha2, y, u, inst.a, grid)[2]
                         - full_terms(alpha, alpha2, y, u, inst.b, grid)[2])
        worst = max(worst, abs(lhs - rhs))
    return worst


def _second_antiderivative(kind: str, z: float, sigma: float) -> float:
    if kind == "g":
        return 0.5 * z * math.erf(math.sqrt(math.pi) * z / sigma) + sigma / (2 * math.pi) * math.exp(
            -math.pi * z * z / sigma ** 2)
    # k_sigma = sigma^2 (g_sigma)'' in one dimension
    return sigma * math.exp(-math.pi * z * z / sigma ** 2)


def pair_integral(kind: str, first: tuple[float, float], second: tuple[float, float], sigma: float) -> float:
    """int_{first} int_{second} G_sigma(s - t) dt ds for the 1-D kernel g or k^(1)."""
    (p, q), (u, v) = first, second
    if q <= p or v <= u:
        return 0.0
    f = lambda z: _second_antiderivative(kind, z, sigma)
    return f(q - u) - f(p - u) - f(q - v) + f(p - v)


def _intersect(intervals) -> tuple[float, float] | None:
    lo = max(i[0] for i in intervals)
    hi = min(i[1] for i in intervals)
    return (lo, hi) if hi > lo else None


def _box_terms(boxes, n: int) -> list:
    """For each assignment of boxes to the 2^n vertices, the per-(slot, axis) interval pairs."""
    vertices = list(itertools.product((0, 1), repeat=n))
    terms = []
    for choice in itertools.product(range(len(boxes)), repeat=len(vertices)):
        pairs = {}
        for i in range(n):
            for c in range(2):
                coord = 2 * i + c
                sides = []
                for s in (0, 1):
                    ivs = [(boxes[b][0][coord], boxes[b][1][coord])
                           for b, r in zip(choice, vertices) if r[i] == s]
                    sides.append(_intersect(ivs))
                if None in sides:
                    break
                pairs[(i, c)] = tuple(sides)
            else:
                continue
            break
        else:
            terms.append(pairs)
    return terms


@dataclass(frozen=True)
class ThetaXiResult:
    theta: tuple
    xi_a: float
    xi_b: float
    residual: float
    bounds_ok: bool


def xi_value(terms, alphas, s: float) -> float:
    n = len(alphas)
    total = 0.0
    for pairs in terms:
        total += math.prod(pair_integral("g", *pairs[(i, c)], s * alphas[i]) for i in range(n) for c in range(2))
    return total


def _theta_integrand(terms, alphas, m: int, s: float) -> float:
    n = len(alphas)
    total = 0.0
    for pairs in terms:
        g_vals = {(i, c): pair_integral("g", *pairs[(i, c)], s * alphas[i]) for i in range(n) for c in range(2)}
        for c in range(2):
            k_val = pair_integral("k", *pairs[(m, c)], s * alphas[m])
            total += k_val * math.prod(v for key, v in g_vals.items() if key != (m, c))
    return -total / s


def verify_theta_xi_identity(A: SetOracle, n: int, alphas, a: float, b: float) -> ThetaXiResult:
    """Theta_m and Xi for a union of boxes in (R^2)^n; checks sum Theta = 2 pi (Xi_a - Xi_b)."""
    if A.boxes is None:
        raise ValueError("Theta/Xi check needs an axis-aligned box or finite union of boxes")
    if n not in (1, 2) or A.dimension != 2 * n:
        raise ValueError("need n in {1, 2} and a set of dimension 2n")
    alphas = tuple(float(al) for al in alphas)
    if len(alphas) != n or any(al <= 0 for al in alphas):
        raise ValueError("need n positive alphas")
    if not 0 < a <= b:
        raise ValueError("need 0 < a <= b")
    terms = _box_terms(A.boxes, n)
    theta = tuple(_quad(lambda s: _theta_integrand(terms, alphas, m, s), a, b) for m in range(n))
    xi_a, xi_b = float(xi_value(terms, alphas, a)), float(xi_value(terms, alphas, b))
    residual = float(abs(sum(theta) - 2 * math.pi * (xi_a - xi_b)))
    tol = 1e-9
    bounds_ok = all(-tol <= th <= 2 * math.pi + tol for th in theta) and all(
        -tol <= xi <= 1 + tol for xi in (xi_a, xi_b))
    return ThetaXiResult(theta, xi_a, xi_b, residual, bounds_ok)
