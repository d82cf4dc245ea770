import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hermite_gap.errors import BracketError, ParameterError, ResolutionError, WeightError
from hermite_gap.solver1d import (BC, ConstantWeight, SLProblem, disk_radial_eigenvalue, export_csv,
                                  lambda1_interval, mu1_interval, shooting_eigenvalue, shooting_solution,
                                  solve_sl, weighted_eigenpair, weighted_mu1)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 5.0])
def test_neumann_equals_dirichlet_plus_one(a):
    assert abs(mu1_interval(-a, a) - lambda1_interval(-a, a) - 1.0) <= 1e-8


def test_truncated_line_gives_one():
    assert mu1_interval(-12, 12) == pytest.approx(1.0, abs=1e-6)
    assert mu1_interval(-math.inf, math.inf) == pytest.approx(1.0, abs=1e-6)


def test_dirichlet_ground_state_on_long_interval_vanishes():
    assert abs(lambda1_interval(-12, 12)) <= 1e-4


def test_small_interval_approaches_laplacian_value():
    a = 0.05
    assert mu1_interval(-a, a) == pytest.approx((math.pi / (2 * a)) ** 2, rel=5e-3)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 4.0), st.floats(1.05, 1.6))
def test_dirichlet_value_decreases_with_width(a, s):
    assert lambda1_interval(-a * s, a * s, 256) < lambda1_interval(-a, a, 256)


@settings(max_examples=10, deadline=None)
@given(st.floats(-3, 2), st.floats(0.3, 3))
def test_reflection_invariance(a, w):
    b = a + w
    assert mu1_interval(a, b, 256) == pytest.approx(mu1_interval(-b, -a, 256), rel=1e-10)


@pytest.mark.parametrize("c", [0.5, 3.0])
def test_constant_weight_scaling_invariant(c):
    base = weighted_mu1(-1, 1, None)
    assert weighted_mu1(-1, 1, ConstantWeight(c)) == pytest.approx(base, rel=1e-12)
    assert weighted_mu1(-1, 1, lambda x: c * np.ones_like(x)) == pytest.approx(base, rel=1e-10)


def test_eigenfunction_has_zero_weighted_mean():
    pair = weighted_eigenpair(-0.7, 1.3, lambda x: 1 + 0.3 * x * x)
    assert pair.zero_mean_defect <= 1e-10


def test_symmetric_first_mode_is_odd():
    a = 1.0
    mu = mu1_interval(-a, a)
    s = shooting_eigenvalue(-a, a, BC.NEUMANN, (mu * (1 - 1e-4), mu * (1 + 1e-4)))
    v = shooting_solution(-a, a, BC.NEUMANN, s)
    vals = v(np.array([-0.5, 0.0, 0.5]))
    assert abs(vals[1]) <= 1e-6 * abs(vals[0])
    assert vals[0] == pytest.approx(-vals[2], rel=1e-6)


def test_shooting_agrees_with_finite_differences():
    for bc, idx in ((BC.NEUMANN, 1), (BC.DIRICHLET, 0)):
        v = solve_sl(SLProblem(-0.3, 1.7, bc), idx).value
        s = shooting_eigenvalue(-0.3, 1.7, bc, (v * (1 - 1e-4), v * (1 + 1e-4)))
        assert s == pytest.approx(v, rel=1e-8)


def test_measured_order_is_two():
    pair = solve_sl(SLProblem(-1, 2, BC.NEUMANN), 1)
    assert 1.8 < pair.order < 2.2
    assert pair.extrapolated


def test_large_disk_dipole_mode_is_one():
    assert disk_radial_eigenvalue(12, 1) == pytest.approx(1.0, abs=1e-6)


def test_unit_disk_radial_modes_ordered():
    assert disk_radial_eigenvalue(1, 1) < disk_radial_eigenvalue(1, 2)


def test_csv_export(tmp_path):
    pairs = [solve_sl(SLProblem(-1, 1, BC.NEUMANN), 1), solve_sl(SLProblem(-1, 1, BC.DIRICHLET), 0)]
    path = tmp_path / "out.csv"
    export_csv(pairs, path)
    rows = list(csv.DictReader(path.open()))
    assert [r["bc"] for r in rows] == ["neumann", "dirichlet"]
    assert float(rows[0]["value"]) == pytest.approx(pairs[0].value, rel=1e-11)


def test_too_coarse_grid_rejected():
    with pytest.raises(ResolutionError):
        SLProblem(-1, 1, BC.NEUMANN, None, 8)


def test_reversed_interval_rejected():
    with pytest.raises(ParameterError):
        SLProblem(1, -1)


def test_nonpositive_weight_rejected():
    with pytest.raises(WeightError):
        weighted_mu1(-1, 1, lambda x: x)


def test_shooting_bracket_without_sign_change():
    with pytest.raises(BracketError):
        shooting_eigenvalue(-1, 1, BC.DIRICHLET, (0.1, 0.2))


def test_negative_angular_index_rejected():
    with pytest.raises(ParameterError):
        disk_radial_eigenvalue(1, -1)
