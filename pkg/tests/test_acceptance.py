"""One test per acceptance criterion, at the stated tolerances."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from hermite_gap import checks
from hermite_gap.battery import load_builtin, thm1_domains
from hermite_gap.checks import Status
from hermite_gap.geometry import (Band, HalfStrip, Rectangle, SectionWeight, invading_sequence, reflection_jacobian,
                                  regular_hexagon, sample_collar, slice_equal_gaussian)
from hermite_gap.solver1d import (BC, SLProblem, lambda1_interval, mu1_interval, shooting_eigenvalue, solve_sl,
                                  transform_check, weighted_eigenpair, weighted_mu1)
from hermite_gap.solver2d import mu1_odd, solve_unbounded

pytestmark = pytest.mark.acceptance


def test_01_neumann_dirichlet_identity_under_one_second():
    mu1_interval(-1, 1)
    lambda1_interval(-1, 1)
    t0 = time.perf_counter()
    gaps = [abs(mu1_interval(-a, a) - lambda1_interval(-a, a) - 1.0) for a in (0.5, 1.0, 2.0, 5.0)]
    elapsed = time.perf_counter() - t0
    assert max(gaps) <= 1e-8
    assert elapsed < 1.0


def test_02_full_line_limit():
    assert abs(mu1_interval(-12, 12) - 1.0) <= 1e-6


def _case_matrix():
    for a in (0.5, 1.0, 2.0):
        R = 2 * a / math.sqrt(3)
        band = Band(regular_hexagon(a), 0.4 * R, 0.6 * R)
        for bc, idx in ((BC.NEUMANN, 1), (BC.DIRICHLET, 0)):
            yield pytest.param(a, None, bc, idx, id=f"{bc.value}-a{a:g}-flat")
            yield pytest.param(band.a, SectionWeight(band), bc, idx, id=f"{bc.value}-a{a:g}-hexband")


@pytest.mark.parametrize("a,phi,bc,idx", list(_case_matrix()))
def test_03_shooting_oracle_and_convergence_order(a, phi, bc, idx):
    pair = solve_sl(SLProblem(-a, a, bc, phi), idx)
    shot = shooting_eigenvalue(-a, a, bc, (pair.value * (1 - 1e-4), pair.value * (1 + 1e-4)), phi)
    assert abs(shot - pair.value) <= 1e-8 * abs(pair.value)
    assert 1.8 < pair.order < 2.2


@pytest.mark.parametrize("a,b,h", [(1.0, 1.0, 0.05), (1.0, 2.0, 0.05), (0.5, 1.0, 0.025)])
def test_04_rectangle_equality(a, b, h):
    t0 = time.perf_counter()
    spec = mu1_odd(Rectangle(a, b), h)
    elapsed = time.perf_counter() - t0
    assert abs(spec.value - mu1_interval(-a, a)) <= 1e-3 * mu1_interval(-a, a)
    assert elapsed < 60.0


@pytest.fixture(scope="module")
def t_example():
    return solve_unbounded(load_builtin("T"), h=0.1, neumann=True)


def test_05_t_example(t_example):
    assert t_example.converged
    assert abs(t_example.mu1 - 2.0) <= 0.01 * 2.0
    assert abs(t_example.mu1_odd - 3.0) <= 0.01 * 3.0


@pytest.mark.parametrize("a,top", [(0.5, 0.0), (1.0, 0.0), (2.0, 1.0)])
def test_06_half_strip_equality(a, top):
    res = solve_unbounded(HalfStrip(a, top), h=0.1)
    target = mu1_interval(-a, a)
    assert abs(res.mu1_odd - target) <= 0.01 * target


def test_07_plane_spectrum():
    rep = checks.check_plane_spectrum(12.0, 0.25, 2e-2)
    assert rep.status is Status.PASS
    assert np.max(np.abs(np.array(rep.extra["values"]) - [1, 1, 2, 2, 2])) <= 2e-2


def test_08_bounded_battery():
    reps = [checks.check_thm1(d, checks.DEFAULT_H, 5e-3) for d in thm1_domains(7)]
    assert len(reps) == 20
    bad = [(r.domain_id, r.status.value, r.margin) for r in reps if r.status is not Status.PASS]
    assert not bad


def test_09_slice_bound():
    hexa = regular_hexagon(1.0)
    floor = mu1_interval(-hexa.a, hexa.a)
    strips = slice_equal_gaussian(hexa, 4).strips
    assert len(strips) == 16
    assert min(weighted_mu1(-s.a, s.a, s.phi) for s in strips) >= floor - 1e-6


def test_10_transform_residual():
    for s in slice_equal_gaussian(regular_hexagon(1.0), 4).strips:
        res = [transform_check(weighted_eigenpair(-s.a, s.a, s.phi, g)).residual for g in (1024, 2048)]
        assert 1.8 < math.log2(res[0] / res[1]) < 2.2
        assert res[1] <= 1e-3


def test_11_reflection_jacobian_and_weight_ratio():
    T = load_builtin("T")
    dn = invading_sequence(T, 6, 0.25)
    pts = sample_collar(dn, 1000, 7)
    assert len(pts) == 1000
    bound = max(1.0, math.exp(-2 * 0.25 * float(T.top(np.array([0.0]))[0])))
    for P in pts:
        s = reflection_jacobian(dn, P)
        assert 1 - 1e-12 <= s.jacobian_abs <= 3 + 1e-12
        assert s.weight_ratio <= bound + 1e-12
    assert checks.jacobian_audit(T, 6, 1000, 7).status is Status.PASS


@pytest.mark.parametrize("name", ["disk", "square", "rectangle-1.5-0.5", "rectangle-1-0.5"])
def test_12_symmetrization_and_diameter_bounds(name):
    dom = load_builtin(name)
    assert checks.check_sw(dom, 5e-3).status is Status.PASS
    assert checks.check_an(dom, 5e-3).status is Status.PASS


def test_13_gap_bound():
    assert checks.check_gap(load_builtin("disk"), 5e-3).status is Status.PASS
    assert checks.check_gap(load_builtin("square"), 5e-3).status is Status.PASS
    assert checks.check_gap(load_builtin("T"), 5e-3).status is Status.HYPOTHESIS_NOT_MET


def test_14_dumbbell_degeneration():
    rep = checks.dumbbell_sweep((0.4, 0.2, 0.1, 0.05))
    v = rep.extra["values"]
    assert all(b < a for a, b in zip(v, v[1:]))
    assert v[-1] < 0.5 * v[0]
    assert rep.status is Status.PASS


def test_15_battery_is_byte_identical():
    cmd = [sys.executable, "-m", "hermite_gap.cli", "battery", "--seed", "7"]
    runs = [subprocess.run(cmd, capture_output=True, check=False) for _ in range(2)]
    assert runs[0].returncode == 0, runs[0].stderr.decode()
    assert runs[0].stdout == runs[1].stdout
    assert b'"exit_code": 0' in runs[0].stdout
