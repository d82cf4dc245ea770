import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hermite_gap.battery import load_builtin
from hermite_gap.errors import DomainValidationError, GeometryError, NotInCollarError, UnsupportedDomainError
from hermite_gap.gaussian import gaussian_measure_2d
from hermite_gap.geometry import (Disk, Rectangle, build_domain, diameter, half_domain, invading_sequence,
                                  reflection_jacobian, regular_hexagon, sample_collar, slice_equal_gaussian)

# --- construction --------------------------------------------------------------

@pytest.mark.parametrize("spec,kind", [
    ({"kind": "rectangle", "a": 1, "b": 2}, "rectangle"),
    ({"kind": "square", "parameters": {"l": 1}}, "rectangle"),
    ({"kind": "disk", "R": 2}, "disk"),
    ({"kind": "hexagon", "a": 1}, "polygon"),
    ({"kind": "half_strip", "a": 1, "top": 0}, "half_strip"),
    ({"kind": "dumbbell", "eps": 0.1}, "dumbbell"),
])
def test_valid_specs_build(spec, kind):
    d = build_domain(spec)
    assert d.kind == kind
    assert d.contains(np.array([[0.0, -0.01]]))[0]


def test_json_string_round_trip():
    d = build_domain(json.dumps({"kind": "rectangle", "a": 1, "b": 0.5}))
    again = build_domain(d.to_json())
    assert again.to_dict() == d.to_dict()


def test_convex_top_profile_rejected_with_witness():
    with pytest.raises(DomainValidationError) as ei:
        build_domain({"kind": "profile", "a": 1, "p": {"poly": [0, 0, 1]}, "q": {"poly": [-1]}})
    assert ei.value.invariant == "p-concave"
    assert ei.value.witness is not None


def test_asymmetric_polygon_rejected():
    with pytest.raises(DomainValidationError) as ei:
        build_domain({"kind": "polygon", "vertices": [[1, 0], [0, 1], [-2, 0], [0, -1]]})
    assert ei.value.invariant == "mirror-symmetry"


@pytest.mark.parametrize("spec,inv", [
    ('{"kind": "rectangle", "a": 1', "json-syntax"),
    ({"kind": "rectangle", "a": 1}, "required-parameter"),
    ({"kind": "blob"}, "known-kind"),
    ({"kind": "dumbbell", "eps": 2.0}, "corridor-width"),
])
def test_malformed_specs_rejected(spec, inv):
    with pytest.raises(DomainValidationError) as ei:
        build_domain(spec)
    assert ei.value.invariant == inv


def test_nonpositive_size_rejected():
    with pytest.raises(DomainValidationError):
        build_domain({"kind": "disk", "R": -1})


@pytest.mark.parametrize("name", ["rectangle-1-1", "disk", "hexagon", "lens", "T", "parabola", "dumbbell"])
def test_builtin_domains_load(name):
    assert load_builtin(name).name


# --- half domain ---------------------------------------------------------------

@pytest.mark.parametrize("dom", [Rectangle(1, 2), Disk(1.5), regular_hexagon(1)])
def test_half_domain_carries_half_the_measure(dom):
    assert half_domain(dom).gaussian_measure() == pytest.approx(0.5 * gaussian_measure_2d(dom), rel=1e-9)


def test_half_domain_axis_length():
    assert half_domain(Rectangle(1, 2)).axis_length() == pytest.approx(4.0)
    assert half_domain(Disk(1.5)).axis_length() == pytest.approx(3.0)


# --- slicing -------------------------------------------------------------------

def test_depth_zero_slice_is_whole_upper_part():
    s = slice_equal_gaussian(regular_hexagon(1), 0)
    assert len(s.strips) == 1
    assert s.strips[0].measure == pytest.approx(s.total_measure, rel=1e-12)


@pytest.mark.parametrize("n", [1, 3, 4])
def test_slices_have_equal_measure_summing_to_total(n):
    s = slice_equal_gaussian(regular_hexagon(1), n)
    m = np.array([t.measure for t in s.strips])
    assert len(m) == 2 ** n
    assert m.sum() == pytest.approx(s.total_measure, rel=1e-10)
    assert np.allclose(m, s.total_measure / 2 ** n, rtol=1e-8)


def test_strip_heights_shrink_with_depth():
    hex1 = regular_hexagon(1)
    heights = [slice_equal_gaussian(hex1, n).max_height for n in range(1, 7)]
    assert all(b < a for a, b in zip(heights, heights[1:]))


def test_slice_weights_are_concave():
    s = slice_equal_gaussian(regular_hexagon(1), 3)
    assert all(t.phi_min_second_difference <= 1e-12 for t in s.strips)


# --- diameter ------------------------------------------------------------------

def test_diameter_closed_forms():
    assert diameter(Rectangle(1, 2)) == pytest.approx(2 * math.hypot(1, 2), rel=1e-9)
    assert diameter(Disk(1.3)) == pytest.approx(2.6, rel=1e-6)
    assert diameter(load_builtin("lens")) == pytest.approx(2.0, rel=1e-6)


def test_hexagon_diameter_brute_force():
    V = np.array(regular_hexagon(1).vertices)
    brute = max(np.hypot(*(p - q)) for p, q in itertools.combinations(V, 2))
    assert diameter(regular_hexagon(1)) == pytest.approx(brute, rel=1e-12)


def test_diameter_of_unbounded_domain_rejected():
    with pytest.raises((UnsupportedDomainError, GeometryError)):
        diameter(load_builtin("T"))


# --- invading sequence ---------------------------------------------------------

@pytest.mark.parametrize("n", [4, 5, 6])
def test_invading_domains_are_nested(n):
    P = load_builtin("parabola")
    small, big = invading_sequence(P, n, 0.25), invading_sequence(P, n + 1, 0.25)
    rng = np.random.default_rng(n)
    Q = np.column_stack([rng.uniform(-small.a, small.a, 1000), rng.uniform(-n, 0.0, 1000)])
    inside = small.contains(Q)
    assert inside.any()
    assert np.all(big.contains(Q[inside]))
    assert np.all(P.contains(Q[inside]))


def test_truncation_exhausts_gaussian_measure():
    T = load_builtin("T")
    rest = gaussian_measure_2d(T) - invading_sequence(T, 6, 0.25).gaussian_measure()
    assert 0 <= rest < 1e-6


def test_truncation_of_bounded_domain_rejected():
    with pytest.raises(UnsupportedDomainError):
        invading_sequence(Rectangle(1, 1), 3, 0.25)


def test_fillet_larger_than_curvature_allows_rejected():
    with pytest.raises(GeometryError):
        invading_sequence(load_builtin("parabola"), 4, 1.0)


# --- reflection ----------------------------------------------------------------

def test_flat_wall_reflection_is_isometric():
    O = invading_sequence(load_builtin("T"), 6, 0.25)
    s = reflection_jacobian(O, (0.95, -3.0))
    assert s.jacobian_abs == pytest.approx(1.0, abs=1e-14)
    assert s.image == pytest.approx((1.05, -3.0))


def test_fillet_reflection_at_collar_depth_approaches_three():
    O = invading_sequence(load_builtin("T"), 6, 0.25)
    c = np.array([O.xn, O.cy])
    u = np.array([1.0, -1.0]) / math.sqrt(2)
    P = c + u * (O.r - 0.4999 * O.r)
    s = reflection_jacobian(O, P)
    assert s.jacobian_abs == pytest.approx(3.0, rel=1e-3)


def test_point_outside_collar_rejected():
    O = invading_sequence(load_builtin("T"), 6, 0.25)
    with pytest.raises(NotInCollarError):
        reflection_jacobian(O, (0.0, -3.0))


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10_000))
def test_collar_samples_satisfy_jacobian_bounds(seed):
    O = invading_sequence(load_builtin("parabola"), 5, 0.25)
    for P in sample_collar(O, 40, seed):
        j = reflection_jacobian(O, P).jacobian_abs
        assert 1 - 1e-12 <= j <= 3 + 1e-12
