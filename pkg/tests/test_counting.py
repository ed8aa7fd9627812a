import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from gapslab.counting import (box_norm_bruteforce, box_norm_check, count_ap_sharp, count_ap_smoothed, count_cube,
                              dyadic_scales, gap_spectrum, loglog_slope, multiscale_error_scan, progression_hits,
                              structured_lower_check, uniform_error_scan, varnavides_lhs, verify_annuli_rigidity)
from gapslab.geometry import ExperimentParams
from gapslab.mollifiers import PHI_HALF_WIDTH, phi_1d
from gapslab.sets import make_bourgain_annuli, make_box, make_empty, make_full, make_thin_boxes


def full_line_smoothed(lam, eps, n=3):
    """Exact N for [0,1] in d=1: sigma is +-1 and the count is E[(1 - (n-1)|y|)_+]."""
    f = lambda t: max(0.0, 1 - (n - 1) * lam * abs(1 + eps * t)) * float(phi_1d(t))
    return integrate.quad(f, -PHI_HALF_WIDTH, PHI_HALF_WIDTH, epsabs=1e-12, limit=200)[0]


def test_empty_set_counts_zero():
    params = ExperimentParams(3, 2.0, 2, 0.1, 0.5, seed=1)
    assert count_ap_sharp(make_empty(2), params, 1000).value == 0
    assert count_ap_smoothed(make_empty(2), params, 1000).value == 0


def test_tiny_gap_counts_full_measure():
    est = count_ap_sharp(make_full(2), ExperimentParams(3, 2.0, 2, 1e-9, 1.0), 5000)
    assert est.value == 1.0


def test_full_square_sharp_count():
    est = count_ap_sharp(make_full(2), ExperimentParams(3, 2.0, 2, 0.1, 1.0, seed=7), 200000)
    assert est.within(1 - 0.76 / math.pi, 4)
    assert est.value == pytest.approx(0.75808, abs=0.003)


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        count_ap_sharp(make_full(3), ExperimentParams(3, 2.0, 2, 0.1), 10)


def test_smoothed_matches_sharp_for_small_eps():
    params = ExperimentParams(3, 2.0, 2, 0.1, 1e-3, seed=5)
    sharp = count_ap_sharp(make_full(2), params, 100000)
    smooth = count_ap_smoothed(make_full(2), params, 100000)
    assert abs(sharp.value - smooth.value) <= 4 * math.hypot(sharp.stderr, smooth.stderr)


@pytest.mark.parametrize("lam,eps", [(0.1, 1.0), (0.25, 0.5), (0.05, 0.2)])
def test_smoothed_full_line_against_quadrature(lam, eps):
    est = count_ap_smoothed(make_full(1), ExperimentParams(3, 2.0, 1, lam, eps, seed=3), 100000)
    assert est.within(full_line_smoothed(lam, eps), 4)


def test_annuli_smoothed_count_positive():
    est = count_ap_smoothed(make_bourgain_annuli(2, 0.1), ExperimentParams(3, 2.0, 2, 0.2, 1.0, seed=2), 50000)
    assert est.value > 0


def test_worker_count_does_not_change_estimates():
    params = ExperimentParams(3, 1.5, 2, 0.2, 0.3, seed=11)
    a = count_ap_smoothed(make_bourgain_annuli(2, 0.1), params, 30000, workers=1, chunk_size=4096)
    b = count_ap_smoothed(make_bourgain_annuli(2, 0.1), params, 30000, workers=4, chunk_size=4096)
    assert (a.value, a.stderr) == (b.value, b.stderr)


def test_cube_count_sharp_full():
    est = count_cube(make_full(2), 1, 0.1, 0.0, 200000, 4)
    assert est.within(1 - 0.4 / math.pi + 0.01 / math.pi, 4)
    assert est.value == pytest.approx(0.87586, abs=0.003)


def test_cube_count_validation():
    with pytest.raises(ValueError):
        count_cube(make_full(3), 1, 0.1, 0.0, 10, 0)
    with pytest.raises(ValueError):
        count_cube(make_full(2), 1, 1.5, 0.0, 10, 0)


def test_varnavides_full_and_thin_boxes():
    assert varnavides_lhs(make_full(1), 3, 0.1, 100000, 1).within(0.9, 4)
    thin = make_thin_boxes([0, 1, 3, 7, 8], 9, 1)
    est = varnavides_lhs(thin, 3, 1.0, 200000, 2)
    assert est.value <= 1 / 9


def test_progression_hits_matches_loop():
    rng = np.random.default_rng(0)
    A = make_bourgain_annuli(2, 0.2)
    x, y = rng.random((500, 2)), rng.normal(scale=0.2, size=(500, 2))
    expected = [all(A.member(x[i] + k * y[i]) for k in range(3)) for i in range(500)]
    assert progression_hits(A, x, y, 3).tolist() == expected


def test_gap_spectrum_full_and_empty():
    full = gap_spectrum(make_full(2), 3, 2.0, 0.01, 0.4, 10, 200, 1)
    assert full.hit_mask.all() and full.longest_hit_run() == 10
    assert full.trial_counts.tolist() == [200] * 10
    empty = gap_spectrum(make_empty(2), 3, 2.0, 0.01, 0.4, 10, 200, 1)
    assert not empty.hit_mask.any() and empty.longest_hit_run() == 0
    assert full.midpoints.size == 10 and full.bucket_width == pytest.approx(0.039)


def test_gap_spectrum_annuli_witnesses_are_rigid():
    A = make_bourgain_annuli(2, 0.1)
    spec = gap_spectrum(A, 3, 2.0, 0.005, 0.5, 99, 3000, 9, keep_all=True)
    xs, ys = spec.all_witnesses()
    assert xs.shape[0] == spec.hit_counts.sum() > 0
    assert verify_annuli_rigidity(A, xs, ys).all()
    assert spec.longest_hit_run() <= round(0.1 / spec.bucket_width) + 2


def test_rigidity_rejects_non_members_and_counts_degenerate_gap():
    A = make_bourgain_annuli(2, 0.1)
    with pytest.raises(ValueError):
        verify_annuli_rigidity(A, [[0.05, 0.05]], [[0.01, 0.0]])
    with pytest.raises(ValueError):
        verify_annuli_rigidity(make_full(2), [[0.5, 0.5]], [[0.1, 0.0]])
    x = np.array([[0.0, 0.0]])
    assert verify_annuli_rigidity(A, x, np.zeros((1, 2))).tolist() == [True]
    assert verify_annuli_rigidity(A, np.zeros((0, 2)), np.zeros((0, 2))).size == 0


def test_multiscale_full_line_against_quadrature():
    res = multiscale_error_scan(make_full(1), 3, 2.0, 1, 0.1, 4, 100000, 8)
    diffs = [r for r in res.rows if r.label == "difference"]
    for row, lam in zip(diffs, dyadic_scales(4)):
        exact = full_line_smoothed(lam, 0.1) - full_line_smoothed(lam, 1.0)
        assert abs(row.value - exact) <= 4 * row.stderr + 1e-12
    cumulative = [r.value for r in res.rows if r.label == "cumulative"]
    assert np.all(np.diff(cumulative) >= 0)
    assert res.reference == pytest.approx([j ** 0.5 for j in range(1, 5)])


def test_multiscale_single_scale_and_validation():
    res = multiscale_error_scan(make_full(1), 3, 2.0, 1, 0.1, 1, 1000, 8)
    assert math.isnan(res.slope) and len(res.rows) == 2
    with pytest.raises(ValueError):
        multiscale_error_scan(make_full(1), 3, 2.0, 1, 0.1, 21, 10, 0)
    assert dyadic_scales(3).tolist() == [0.75, 0.375, 0.1875]


def test_uniform_scan_equal_entries_give_zero_difference():
    res = uniform_error_scan(make_bourgain_annuli(2, 0.1), 3, 2.0, 2, 0.2, [0.1, 0.1, 0.1], 5000, 1)
    assert all(r.value == 0 for r in res.rows if r.label == "difference")
    with pytest.raises(ValueError):
        uniform_error_scan(make_full(2), 3, 2.0, 2, 0.2, [0.1, 0.2, 0.05], 10, 0)


def test_uniform_scan_small_eps_convergence():
    # rings of width 0.01 / 0.1 leave almost no room once the smoothing is far below the ring width
    A = make_bourgain_annuli(2, 0.1)
    res = uniform_error_scan(A, 3, 2.0, 2, 0.1, [0.01, 0.005, 0.001], 200000, 3)
    diffs = {r.scale: r.value for r in res.rows if r.label == "difference"}
    assert diffs[0.005] <= diffs[0.01] + 1e-4
    assert diffs[0.01] <= 5e-4


def test_loglog_slope():
    x = np.array([1.0, 2.0, 4.0])
    assert loglog_slope(x, 3 * x ** 1.5) == pytest.approx(1.5)
    assert math.isnan(loglog_slope([1.0, 2.0], [0.0, 1.0]))


@given(st.integers(1, 3).flatmap(lambda n: st.lists(
    st.lists(st.integers(0, 1), min_size=3 if n == 1 else 2, max_size=3 if n == 1 else 2),
    min_size=2, max_size=3).map(lambda rows: (n, rows))))
def test_box_norm_exact_matches_bruteforce(data):
    n, rows = data
    if n == 1:
        B = np.array(rows[0])
    elif n == 2:
        B = np.array([r[:2] for r in rows])
    else:
        B = np.array([[r[:2] for r in rows[:2]], [r[:2][::-1] for r in rows[:2]]])
    res = box_norm_check(B)
    assert res.lhs == pytest.approx(box_norm_bruteforce(B))
    assert res.holds


def test_box_norm_constants_and_validation():
    ones = np.ones((3, 3), dtype=int)
    res = box_norm_check(ones)
    assert res.lhs == 1 and res.rhs == 1 and res.holds
    zeros = box_norm_check(np.zeros((2, 2, 2), dtype=int))
    assert zeros.lhs == 0 and zeros.rhs == 0 and zeros.holds
    with pytest.raises(ValueError):
        box_norm_check(np.array([[0, 2]]))
    with pytest.raises(ValueError):
        box_norm_check(np.ones((2, 2)), n=3)


def test_box_norm_random_grids():
    rng = np.random.default_rng(6)
    for shape in ((7,), (5, 4), (3, 3, 3), (2, 2, 2, 2)):
        B = (rng.random(shape) < 0.5).astype(int)
        assert box_norm_check(B).holds


def test_structured_lower_check():
    res = structured_lower_check(make_box([0.2, 0.2, 0.1, 0.1], [0.9, 0.8, 0.9, 0.7]), 2, 0.1, 20000, 1)
    assert res.passed and res.value.value > 0 and res.slope <= 4.5
    with pytest.raises(ValueError):
        structured_lower_check(make_empty(4), 2, 0.1, 100, 1)


def test_count_monotone_in_lambda_and_in_range():
    values = [count_ap_sharp(make_full(2), ExperimentParams(3, 2.0, 2, lam, 1.0, seed=2), 20000).value
              for lam in (0.05, 0.1, 0.2, 0.4)]
    assert all(0 <= v <= 1 for v in values)
    assert values == sorted(values, reverse=True)


def test_box_norm_many_random_grids():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        assert box_norm_check(rng.random((8, 8)) < rng.random()).holds
    for _ in range(100):
        assert box_norm_check((rng.random((4, 4, 4)) < rng.random()).astype(int)).holds
