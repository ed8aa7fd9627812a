import math

import numpy as np
import pytest
from scipy import integrate, optimize, special, stats

from gapslab.geometry import lp_norm
from gapslab.mollifiers import phi_1d
from gapslab.rng import SeedStream
from gapslab.sphere import (SphereSampler, circle_ft, ft_decay_check, lp_ball_volume, sample_mollified_gap,
                            sample_sigma, sample_sigma_eta_rejection, sigma_eta_total_mass, sigma_limit_mass)


def test_exact_sampler_lies_on_sphere():
    for p in (1.0, 1.5, 2.0, 3.0):
        x = sample_sigma(p, 3, SeedStream(1), 20000)
        assert np.max(np.abs(lp_norm(x, p) - 1)) <= 1e-12


def test_single_draw_shape():
    assert sample_sigma(2.0, 4, SeedStream(2)).shape == (4,)


def test_zero_sphere_is_fair():
    x = sample_sigma(1.7, 1, SeedStream(3), 100000)
    assert set(np.unique(x)) == {-1.0, 1.0}
    assert stats.binomtest(int((x > 0).sum()), x.size).pvalue > 1e-3


def test_p2_angles_uniform():
    x = sample_sigma(2.0, 2, SeedStream(4), 100000)
    theta = np.arctan2(x[:, 1], x[:, 0]) % (2 * math.pi)
    counts, _ = np.histogram(theta, bins=36, range=(0, 2 * math.pi))
    assert stats.chisquare(counts).pvalue > 1e-3


def test_orthant_and_permutation_symmetry():
    x = sample_sigma(1.5, 3, SeedStream(5), 100000)
    orthant = ((x > 0) * np.array([1, 2, 4])).sum(axis=1)
    assert stats.chisquare(np.bincount(orthant, minlength=8)).pvalue > 1e-3
    largest = np.argmax(np.abs(x), axis=1)
    assert stats.chisquare(np.bincount(largest, minlength=3)).pvalue > 1e-3


def test_exact_sampler_matches_rejection_oracle_in_angle():
    exact = sample_sigma(1.5, 2, SeedStream(6), 100000)
    oracle = sample_sigma_eta_rejection(1.5, 2, 1e-3, SeedStream(7), 100000)
    ang = lambda v: np.arctan2(v[:, 1], v[:, 0])
    res = stats.ks_2samp(ang(exact), ang(oracle))
    assert res.statistic <= 0.01


def test_rejection_oracle_stays_in_shell():
    x = sample_sigma_eta_rejection(1.5, 2, 1e-2, SeedStream(8), 5000)
    assert np.all(np.abs(np.sum(np.abs(x) ** 1.5, axis=1) - 1) <= 1e-2)


def test_total_mass_values():
    assert sigma_eta_total_mass(2.0, 2, 1e-3) == pytest.approx(math.pi, abs=1e-3)
    assert sigma_eta_total_mass(1.0, 1, 1e-3) == pytest.approx(2.0, abs=1e-3)


def test_total_mass_stable_and_converges_to_cone_mass():
    coarse = sigma_eta_total_mass(1.5, 2, 1e-2)
    fine = sigma_eta_total_mass(1.5, 2, 1e-3)
    assert coarse > 0 and abs(coarse - fine) <= 0.01 * fine
    assert fine == pytest.approx(sigma_limit_mass(1.5, 2), rel=1e-4)
    assert SphereSampler(1.5, 2).normalization == sigma_limit_mass(1.5, 2)


def test_ball_volume_formula():
    assert lp_ball_volume(2.0, 2) == pytest.approx(math.pi)
    assert lp_ball_volume(1.0, 3) == pytest.approx(8 / 6)
    assert lp_ball_volume(2.0, 3) == pytest.approx(4 * math.pi / 3)


def test_mollified_gap_support():
    lam, eps, p, d = 0.3, 0.05, 1.5, 3
    y = sample_mollified_gap(p, d, lam, eps, SeedStream(9), 100000)
    assert np.all(np.abs(lp_norm(y, p) - lam) <= 3 * eps * lam * d ** (1 / p))
    big = sample_mollified_gap(2.0, 2, 1.0, 1.0, SeedStream(10), 10 ** 6)
    assert np.all(np.isfinite(big)) and np.mean(np.linalg.norm(big, axis=1)) > 0.5
    with pytest.raises(ValueError):
        sample_mollified_gap(2.0, 2, 0.0, 0.5, SeedStream(1))


def test_mollified_gap_density_in_one_dimension():
    lam, eps = 0.5, 0.2
    y = sample_mollified_gap(2.0, 1, lam, eps, SeedStream(11), 200000)[:, 0]
    s = eps * lam
    density = lambda t: 0.5 * (phi_1d((t - lam) / s) + phi_1d((t + lam) / s)) / s
    edges = np.linspace(-lam - 3 * s, lam + 3 * s, 41)
    counts, _ = np.histogram(y, edges)
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        prob = integrate.quad(density, lo, hi, epsabs=1e-12)[0]
        expected = prob * y.size
        assert abs(c - expected) <= 3 * math.sqrt(max(expected, 1.0)) + 1


def test_sigma_lambda_is_dilation():
    rng_a = SeedStream(12).generator()
    rng_b = SeedStream(12).generator()
    s = SphereSampler(1.5, 2)
    assert np.array_equal(s.dilate(rng_a, 100, 0.25), 0.25 * s.sigma(rng_b, 100))


def test_circle_ft_values():
    assert circle_ft(0.0) == 1.0
    assert circle_ft(0.5) == pytest.approx(-0.304242, abs=1e-6)
    root = optimize.brentq(lambda t: float(circle_ft(t)), 0.3, 0.45, xtol=1e-14)
    assert root == pytest.approx(2.404826 / (2 * math.pi), abs=1e-6)
    xi = np.linspace(0, 20, 2001)
    assert np.max(np.abs(circle_ft(xi) - special.j0(2 * math.pi * xi))) <= 1e-10
    with pytest.raises(ValueError):
        circle_ft(-1.0)


def test_circle_ft_is_mean_of_plane_wave():
    # direct route: average exp(-2 pi i xi.z) over the circle by the trapezoid rule
    theta = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
    for r in (0.1, 0.7, 3.3):
        direct = np.mean(np.cos(2 * math.pi * r * np.cos(theta)))
        assert circle_ft(r) == pytest.approx(direct, abs=1e-12)


def test_ft_decay():
    assert ft_decay_check(0.0, 2) == 1.0
    assert ft_decay_check(100.0, 10 ** 4) <= 1.2
    beyond = [ft_decay_check(x, int(100 * x)) for x in (10, 20, 40, 80)]
    assert max(beyond) - beyond[0] <= 1e-3
