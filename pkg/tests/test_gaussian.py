import math
from types import SimpleNamespace

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hermite_gap.errors import DegenerateElementError, InvalidIntervalError, UnsupportedOrderError
from hermite_gap.gaussian import (TRIANGLE_RULE, gauss_cdf_interval, gaussian_measure_2d, second_moment_x,
                                  triangle_weighted_integral, weighted_interval_rule)
from hermite_gap.geometry import Band, Disk, Rectangle, build_domain, regular_hexagon

mp.mp.dps = 40


def mp_gauss(a, b):
    return float((mp.erf(mp.mpf(b) / mp.sqrt(2)) - mp.erf(mp.mpf(a) / mp.sqrt(2))) / 2)


# --- gauss_cdf_interval --------------------------------------------------------

def test_total_mass_is_one():
    assert gauss_cdf_interval(-math.inf, math.inf) == 1.0


def test_half_line_is_one_half():
    assert gauss_cdf_interval(0.0, math.inf) == 0.5


def test_unit_interval_matches_high_precision_erf():
    v = gauss_cdf_interval(-1.0, 1.0)
    assert abs(v - mp_gauss(-1, 1)) <= 1e-14
    assert abs(v - 0.6826894921) < 1e-10


@pytest.mark.parametrize("a,b", [(-12, -11), (3, 9), (-0.3, 7.5), (8, math.inf), (-math.inf, -10)])
def test_tail_intervals_match_erf_oracle(a, b):
    assert abs(gauss_cdf_interval(a, b) - mp_gauss(a, b)) <= 1e-14


def test_reversed_interval_rejected():
    with pytest.raises(InvalidIntervalError):
        gauss_cdf_interval(1.0, -1.0)


reals = st.floats(-13, 13, allow_nan=False)


@given(reals, reals, reals)
def test_interval_measure_is_additive(x, y, z):
    a, b, c = sorted((x, y, z))
    assert abs(gauss_cdf_interval(a, b) + gauss_cdf_interval(b, c) - gauss_cdf_interval(a, c)) <= 1e-13


@given(st.floats(0.0, 8.0), st.floats(1e-3, 1.0))
def test_symmetric_measure_increases_with_width(t, dt):
    wide, narrow = gauss_cdf_interval(-t - dt, t + dt), gauss_cdf_interval(-t, t)
    assert wide >= narrow
    if t < 6.0:
        assert wide > narrow


# --- gaussian_measure_2d -------------------------------------------------------

def test_plane_measure_is_one():
    assert gaussian_measure_2d(SimpleNamespace(kind="plane")) == 1.0


@pytest.mark.parametrize("a,b", [(1, 1), (0.5, 2), (3, 0.1)])
def test_rectangle_measure_is_product(a, b):
    v = gaussian_measure_2d(Rectangle(a, b))
    assert v == pytest.approx(mp_gauss(-a, a) * mp_gauss(-b, b), rel=1e-12)


@pytest.mark.parametrize("R", [0.3, 1.0, 2.5])
def test_disk_measure_against_radial_quadrature(R):
    oracle = float(mp.quad(lambda r: r * mp.exp(-r * r / 2), [0, R]))
    assert gaussian_measure_2d(Disk(R)) == pytest.approx(oracle, rel=1e-10)


def test_lens_measure_against_double_quadrature():
    lens = build_domain({"kind": "profile", "a": 1, "p": {"poly": [1, 0, -1]}, "q": {"poly": [-1, 0, 1]}})
    oracle = mp.quad(lambda x: mp.exp(-x * x / 2) * (mp.erf((1 - x * x) / mp.sqrt(2))), [-1, 0, 1])
    oracle = float(oracle / mp.sqrt(2 * mp.pi))
    assert gaussian_measure_2d(lens) == pytest.approx(oracle, rel=1e-6)


def test_hexagon_measure_equals_sum_over_horizontal_partition():
    hexa = regular_hexagon(1.0)
    R = 2 / math.sqrt(3)
    cuts = np.linspace(-R, R, 7)
    parts = sum(gaussian_measure_2d(Band(hexa, lo, hi)) for lo, hi in zip(cuts[:-1], cuts[1:]))
    assert parts == pytest.approx(gaussian_measure_2d(hexa), rel=1e-9)


def test_second_moment_of_tall_rectangle_approaches_one_dimensional_moment():
    v = second_moment_x(Rectangle(12, 12))
    assert v == pytest.approx(1.0, abs=1e-10)


# --- weighted_interval_rule ----------------------------------------------------

def test_rule_integrates_constant():
    rule = weighted_interval_rule(-1, 1, 4)
    assert rule.integrate(np.ones_like) == pytest.approx(math.sqrt(2 * math.pi) * mp_gauss(-1, 1), rel=1e-13)


@pytest.mark.parametrize("a", [0.3, 1.0, 5.0])
def test_rule_odd_integrand_vanishes(a):
    assert abs(weighted_interval_rule(-a, a, 5).integrate(lambda x: x)) < 1e-14


def test_rule_second_moment_of_truncated_line():
    rule = weighted_interval_rule(-12, 12, 2)
    assert rule.integrate(lambda x: x * x) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)


@pytest.mark.parametrize("k", [0, 3, 8, 17, 30])
def test_rule_monomials_match_mpmath(k):
    a, b = -0.7, 2.3
    rule = weighted_interval_rule(a, b, 30)
    oracle = float(mp.quad(lambda x: x ** k * mp.exp(-x * x / 2), [a, b]))
    assert rule.integrate(lambda x: x ** k) == pytest.approx(oracle, rel=1e-12)


def test_rule_order_cap():
    with pytest.raises(UnsupportedOrderError):
        weighted_interval_rule(0, 1, 10_000)


# --- triangle rule -------------------------------------------------------------

def test_triangle_rule_weights_positive_and_normalized():
    assert np.all(TRIANGLE_RULE.weights > 0)
    assert TRIANGLE_RULE.weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert TRIANGLE_RULE.order >= 6


def test_weight_cancelling_integrand_gives_area():
    v = triangle_weighted_integral([(0, 0), (1, 0), (0, 1)], lambda x, y: np.exp(0.5 * (x * x + y * y)))
    assert v == pytest.approx(0.5, rel=1e-13)


def test_mirror_triangle_same_integral():
    T = np.array([(0.2, -0.4), (1.3, 0.1), (0.5, 0.9)])
    M = T * np.array([-1, 1])
    one = lambda x, y: np.ones_like(x)
    assert triangle_weighted_integral(T, one) == pytest.approx(triangle_weighted_integral(M, one), rel=1e-14)


def _subdivide(T, depth):
    tris = [np.asarray(T, float)]
    for _ in range(depth):
        nxt = []
        for a, b, c in tris:
            ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
            nxt += [np.array(t) for t in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))]
        tris = nxt
    return tris


def test_triangle_rule_matches_subdivision_refinement():
    T = [(0.1, 0.2), (0.6, 0.1), (0.3, 0.55)]
    one = lambda x, y: np.ones_like(x)
    coarse = triangle_weighted_integral(T, one)
    fine = sum(triangle_weighted_integral(t, one) for t in _subdivide(T, 4))
    assert coarse == pytest.approx(fine, rel=1e-9)


def test_triangle_rule_exact_for_degree_six_monomials():
    V = np.array([[0, 0], [1, 0], [0, 1.0]])
    q = TRIANGLE_RULE.nodes @ V
    for i in range(7):
        for j in range(7 - i):
            exact = math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)
            assert 0.5 * np.dot(TRIANGLE_RULE.weights, q[:, 0] ** i * q[:, 1] ** j) == pytest.approx(exact, abs=1e-14)


def test_degenerate_triangle_rejected():
    with pytest.raises(DegenerateElementError):
        triangle_weighted_integral([(0, 0), (1, 1), (2, 2)], lambda x, y: x)


@settings(max_examples=50)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_nonnegative_integrand_nonnegative_result(c):
    T = np.array(c).reshape(3, 2)
    d1, d2 = T[1] - T[0], T[2] - T[0]
    if abs(d1[0] * d2[1] - d1[1] * d2[0]) < 1e-6:
        return
    assert triangle_weighted_integral(T, lambda x, y: x * x + np.abs(y)) >= 0.0
