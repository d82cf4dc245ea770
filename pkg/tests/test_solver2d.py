import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hermite_gap.battery import load_builtin
from hermite_gap.errors import DegenerateDomainError, GeometryError, UnsupportedDomainError
from hermite_gap.gaussian import gaussian_measure_2d
from hermite_gap.geometry import Disk, Rectangle, half_domain, regular_hexagon
from hermite_gap.mesh import triangulate
from hermite_gap.solver1d import BC, SLProblem, disk_radial_eigenvalue, mu1_interval, solve_sl
from hermite_gap.solver2d import (ConvergenceRecord, assemble, export_spectrum_csv, extrapolate_levels, mu1_odd,
                                  neumann_spectrum, rayleigh_upper_bound, solve_unbounded)


# --- assembly ------------------------------------------------------------------

@pytest.fixture(scope="module")
def hex_system():
    return assemble(triangulate(regular_hexagon(1), 0.15))


def test_stiffness_annihilates_constants(hex_system):
    K = hex_system.pair.K
    assert np.max(np.abs(K @ np.ones(len(K)))) <= 1e-12 * np.max(np.abs(K))


def test_mass_total_is_gaussian_measure_of_mesh(hex_system):
    M = hex_system.pair.M
    one = np.ones(len(M))
    assert one @ M @ one == pytest.approx(2 * math.pi * gaussian_measure_2d(regular_hexagon(1)), rel=1e-12)


def test_stiffness_is_positive_semidefinite(hex_system):
    assert np.linalg.eigvalsh(hex_system.pair.K).min() >= -1e-12


def test_mirror_mesh_gives_same_spectrum():
    m = triangulate(half_domain(Disk(1)), 0.15)
    a = np.linalg.eigvalsh(np.linalg.solve(*_dense(assemble(m, True))))
    b = np.linalg.eigvalsh(np.linalg.solve(*_dense(assemble(m.mirror(), True))))
    assert np.max(np.abs(np.sort(a)[:4] - np.sort(b)[:4])) <= 1e-10


def _dense(system):
    return system.pair.M, system.pair.K


def test_axis_constraint_needs_axis():
    with pytest.raises(GeometryError):
        assemble(triangulate(Disk(1), 0.2), constrain_axis=True)


# --- spectra -------------------------------------------------------------------

def one_d_spectrum(a, k):
    return [0.0] + [solve_sl(SLProblem(-a, a, BC.NEUMANN), j).value for j in range(1, k)]


def test_rectangle_spectrum_is_sum_of_interval_spectra():
    a, b = 1.0, 0.5
    sx, sy = one_d_spectrum(a, 4), one_d_spectrum(b, 3)
    exact = np.sort([u + v for u in sx for v in sy])[:5]
    spec = neumann_spectrum(Rectangle(a, b), 0.05, k=5)
    assert spec.extrapolated[0] == pytest.approx(0.0, abs=1e-10)
    assert np.allclose(spec.extrapolated[1:], exact[1:], rtol=2e-3)


def test_square_first_eigenvalue_is_double():
    spec = neumann_spectrum(Rectangle(1, 1), 0.1, k=4)
    assert spec.values[1] == pytest.approx(spec.values[2], rel=1e-6)
    assert spec.extrapolated[1] == pytest.approx(spec.extrapolated[2], rel=1e-5)


def test_disk_odd_value_matches_radial_solver():
    assert mu1_odd(Disk(1), 0.05).value == pytest.approx(disk_radial_eigenvalue(1, 1), rel=1e-4)


@pytest.mark.parametrize("a,b", [(1, 1), (0.5, 1)])
def test_rectangle_odd_value_matches_interval(a, b):
    assert mu1_odd(Rectangle(a, b), 0.05).value == pytest.approx(mu1_interval(-a, a), rel=1e-4)


def test_tall_rectangle_approaches_strip_value():
    assert mu1_odd(Rectangle(1, 12), 0.1).value == pytest.approx(mu1_interval(-1, 1), rel=1e-3)


def test_refinement_decreases_odd_value():
    spec = mu1_odd(regular_hexagon(1), 0.05)
    vals = [v[0] for _, v in spec.levels]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert spec.bound_direction == "upper"


@settings(max_examples=5, deadline=None)
@given(st.floats(0.5, 1.5), st.floats(0.4, 1.5))
def test_odd_value_bounded_by_linear_trial_function(a, b):
    dom = Rectangle(a, b)
    spec = mu1_odd(dom, 0.1, levels=1)
    assert spec.values[0] <= rayleigh_upper_bound(dom) + 1e-6


def test_linear_trial_bound_closed_forms():
    big = Rectangle(12, 12)
    assert rayleigh_upper_bound(big) == pytest.approx(1.0, abs=1e-10)
    a = 0.7
    gx = math.erf(a / math.sqrt(2))
    x2 = gx - 2 * a * math.exp(-a * a / 2) / math.sqrt(2 * math.pi)
    assert rayleigh_upper_bound(Rectangle(a, 1.3)) == pytest.approx(gx / x2, rel=1e-9)


def test_linear_trial_bound_degenerate_domain():
    with pytest.raises(DegenerateDomainError):
        rayleigh_upper_bound(Rectangle(1e-200, 1))


def test_unbounded_domain_rejected_by_bounded_solvers():
    with pytest.raises(UnsupportedDomainError):
        mu1_odd(load_builtin("T"), 0.1)


# --- truncation loop -----------------------------------------------------------

@pytest.fixture(scope="module")
def t_result():
    return solve_unbounded(load_builtin("T"), h=0.1, neumann=True)


def test_truncation_loop_converges_on_t(t_result):
    assert t_result.converged
    assert t_result.mu1_odd == pytest.approx(3.0, rel=1e-2)
    assert t_result.mu1 == pytest.approx(2.0, rel=1e-2)


def test_truncation_record_decreases_with_depth(t_result):
    rec = t_result.records["odd"]
    vals = [v for _, v in rec.samples]
    assert vals[1] < vals[0]
    assert all(b <= a + rec.tolerance for a, b in zip(vals, vals[1:]))
    assert [n for n, _ in rec.samples] == t_result.depths


def test_bounded_domain_rejected_by_truncation_loop():
    with pytest.raises(UnsupportedDomainError):
        solve_unbounded(Rectangle(1, 1))


# --- helpers -------------------------------------------------------------------

def test_extrapolation_of_exact_quadratic_error():
    vals = [np.array([2 + 0.16]), np.array([2 + 0.04]), np.array([2 + 0.01])]
    ext, order = extrapolate_levels(vals)
    assert ext[0] == pytest.approx(2.0, abs=1e-14)
    assert order[0] == pytest.approx(2.0)


def test_extrapolation_skipped_outside_trust_window():
    vals = [np.array([2 + 0.4]), np.array([2 + 0.2]), np.array([2 + 0.1])]
    ext, order = extrapolate_levels(vals)
    assert order[0] == pytest.approx(1.0)
    assert ext[0] == pytest.approx(2.1)


def test_record_rejects_non_monotone_parameter():
    with pytest.raises(ValueError):
        ConvergenceRecord("h", [(0.1, 1.0), (0.2, 1.0), (0.05, 1.0)], 1.0, 2.0, True, 1e-3)


def test_spectrum_csv(tmp_path):
    spec = mu1_odd(Rectangle(1, 1), 0.2)
    path = tmp_path / "s.csv"
    export_spectrum_csv([spec], path)
    assert path.read_text().splitlines()[0].startswith("domain,kind,index")
