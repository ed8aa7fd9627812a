import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from gapslab.gowers import indicator, un_norm_grid
from gapslab.oscillatory import (FILON_ABOVE, OscillatoryInstance, _integrate_filon, _integrate_gl, decay_fit,
                                 gauss_legendre, oscillatory_I, phase_derivative, phase_eval,
                                 phase_second_derivative, un_1d_oscillatory, un_1d_power)


def simpson_I(inst, points=400001):
    x = np.linspace(inst.a, inst.b, points)
    return integrate.simpson(np.exp(2j * math.pi * inst.u * phase_eval(inst, x)), x=x)


def test_gauss_legendre_exact_for_polynomials():
    t, w = gauss_legendre(10)
    assert w.sum() == pytest.approx(1.0)
    assert np.dot(w, t ** 19) == pytest.approx(1 / 20)


def test_phase_examples():
    quad = OscillatoryInstance(2.0, 3, 1.0, (0.4, -0.9), 0.0)
    x = np.linspace(0, 1, 7)
    assert np.allclose(phase_eval(quad, x), 2 * 0.4 * -0.9)
    lin = OscillatoryInstance(1.0, 2, 1.0, (0.6,), 0.0)
    assert np.allclose(phase_eval(lin, np.linspace(0.1, 2, 9)), -0.6)


@given(st.floats(1.0, 4.0), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.2, 1.0))
def test_phase_derivatives_match_finite_differences(p, h1, h2, x):
    inst = OscillatoryInstance(p, 3, 1.0, (h1, h2), 0.0)
    offsets = x + inst.offsets
    if np.min(np.abs(offsets)) < 1e-2:
        return
    step = 1e-6
    fd = (phase_eval(inst, x + step) - phase_eval(inst, x - step)) / (2 * step)
    assert float(phase_derivative(inst, x)) == pytest.approx(float(fd), abs=1e-5)
    fd2 = (phase_derivative(inst, x + step) - phase_derivative(inst, x - step)) / (2 * step)
    assert float(phase_second_derivative(inst, x)) == pytest.approx(float(fd2), abs=1e-3)


def test_instance_validation_and_range():
    inst = OscillatoryInstance(1.5, 3, 10.0, (0.5, 0.7), 0.3)
    assert (inst.a, inst.b) == pytest.approx((0.3, 1.8))
    assert not OscillatoryInstance(1.5, 2, 1.0, (3.5,), 0.0).active
    assert oscillatory_I(OscillatoryInstance(1.5, 2, 1.0, (3.5,), 0.0)) == 0
    with pytest.raises(ValueError):
        OscillatoryInstance(1.5, 3, 1.0, (0.5,), 0.0)
    with pytest.raises(ValueError):
        OscillatoryInstance(1.5, 2, 1.0, (0.5,), 1.0)


def test_zero_frequency_and_quadratic_phase():
    assert oscillatory_I(OscillatoryInstance(1.5, 3, 0.0, (0.5, 0.7), 0.3)) == pytest.approx(1.5)
    val = oscillatory_I(OscillatoryInstance(2.0, 3, 1e3, (0.5, 0.7), 0.3))
    assert abs(val) == pytest.approx(1.5, rel=1e-10)


@pytest.mark.parametrize("u", [1.0, 10.0, 100.0, 1000.0])
def test_integral_against_dense_simpson(u):
    inst = OscillatoryInstance(1.5, 3, u, (0.5, 0.7), 0.3)
    assert oscillatory_I(inst) == pytest.approx(simpson_I(inst), abs=1e-8)


def test_filon_and_panels_agree():
    inst = OscillatoryInstance(1.5, 3, 9e4, (0.5, 0.7), 0.3)
    assert _integrate_filon(inst) == pytest.approx(_integrate_gl(inst), abs=1e-10)
    assert FILON_ABOVE == 1e5


def test_integral_decays_like_inverse_frequency():
    values = [abs(oscillatory_I(OscillatoryInstance(1.5, 3, u, (0.5, 0.7), 0.3))) for u in (1e2, 1e3, 1e4, 1e6)]
    assert values == sorted(values, reverse=True)
    assert all(1 <= u * v <= 10 for u, v in zip((1e2, 1e3, 1e4, 1e6), values))


@given(st.floats(1.0, 3.0), st.floats(0, 200), st.floats(-2, 2), st.floats(-2, 2))
def test_modulus_bounded_by_length(p, u, h1, h2):
    inst = OscillatoryInstance(p, 3, u, (h1, h2), 0.1)
    assert abs(oscillatory_I(inst)) <= max(inst.b - inst.a, 0.0) + 1e-9


def test_zero_frequency_norm_matches_grid_norm():
    value = un_1d_oscillatory(0.0, 2, 1.5, 0.0, nodes=32)
    assert value == pytest.approx(18 ** 0.25, rel=1e-8)
    grid = un_norm_grid(indicator([0.0], [3.0]), 2, 0.003)
    assert value == pytest.approx(grid, rel=0.01)


def test_quadratic_phase_does_not_decay():
    a = un_1d_oscillatory(1.0, 3, 2.0, 0.3, nodes=12)
    b = un_1d_oscillatory(100.0, 3, 2.0, 0.3, nodes=12)
    assert a == pytest.approx(b, rel=1e-9)
    with pytest.raises(ValueError):
        un_1d_power(1.0, 4, 2.0, 0.3)


def test_non_quadratic_phase_decays():
    fit = decay_fit([1.0, 10.0, 100.0], 2, 1.5, 0.3, nodes=24)
    assert fit.exponent > 0
    assert fit.values[0] > fit.values[-1]
    assert math.isnan(fit.guaranteed_floor)
    assert decay_fit([1.0, 2.0], 3, 1.5, 0.3, nodes=4).guaranteed_floor == pytest.approx(2 / math.ceil(2 ** 6 * 4.5))


def test_worker_count_does_not_change_norm():
    a = un_1d_power(10.0, 2, 1.5, 0.3, nodes=16, workers=1)
    b = un_1d_power(10.0, 2, 1.5, 0.3, nodes=16, workers=3)
    assert a == b
