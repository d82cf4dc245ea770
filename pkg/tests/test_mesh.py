import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hermite_gap.battery import load_builtin
from hermite_gap.errors import ResolutionError, UnsupportedDomainError
from hermite_gap.gaussian import gaussian_measure_2d
from hermite_gap.geometry import Disk, Rectangle, Tag, half_domain, regular_hexagon
from hermite_gap.mesh import nested_meshes, read_mesh, refine, triangulate, write_mesh


@pytest.mark.parametrize("dom", [Rectangle(1, 0.5), Disk(1), regular_hexagon(1), load_builtin("lens"),
                                 load_builtin("dumbbell"), half_domain(Disk(1)), half_domain(Rectangle(1, 2))])
def test_meshes_are_valid_and_positively_oriented(dom):
    m = triangulate(dom, 0.1)
    m.validate()
    assert np.all(m.signed_areas() > 0)
    assert m.h <= 2 * 0.1


def test_polygon_mesh_area_is_exact():
    assert triangulate(regular_hexagon(1), 0.1).area() == pytest.approx(1.5 * math.sqrt(3) * (2 / math.sqrt(3)) ** 2,
                                                                         rel=1e-12)
    assert triangulate(load_builtin("dumbbell"), 0.05).area() == pytest.approx(2.1, rel=1e-12)


def test_disk_area_deficit_is_second_order():
    deficits = [math.pi - triangulate(Disk(1), h).area() for h in (0.2, 0.1, 0.05)]
    assert all(d > 0 for d in deficits)
    orders = [math.log2(a / b) for a, b in zip(deficits, deficits[1:])]
    assert all(1.8 < p < 2.2 for p in orders)


def test_refined_disk_boundary_vertices_lie_on_circle():
    m = refine(refine(triangulate(Disk(1), 0.2)))
    r = np.hypot(*m.vertices[m.boundary_nodes()].T)
    assert np.allclose(r, 1.0, atol=1e-14)


def test_gaussian_mass_of_disk_converges_at_second_order():
    exact = gaussian_measure_2d(Disk(1))
    errs = [abs(exact - m.gaussian_mass()) for m in nested_meshes(Disk(1), 0.05)]
    assert errs[-1] < 1e-3
    assert 1.7 < math.log2(errs[-2] / errs[-1]) < 2.3


def test_rectangle_gaussian_mass_is_exact_to_quadrature():
    m = triangulate(Rectangle(1, 2), 0.1)
    assert m.gaussian_mass() == pytest.approx(gaussian_measure_2d(Rectangle(1, 2)), rel=1e-6)


def test_half_domain_axis_edges_tagged_on_the_axis():
    m = triangulate(half_domain(Disk(1)), 0.1)
    ax = m.axis_nodes()
    assert ax.size > 10
    assert np.all(np.abs(m.vertices[ax, 0]) <= 1e-12)
    assert any(t is Tag.OUTER for t in m.edge_tags)


def test_full_domain_has_no_axis_edges():
    assert triangulate(Disk(1), 0.1).axis_nodes().size == 0


def test_mirror_mesh_is_valid():
    m = triangulate(half_domain(regular_hexagon(1)), 0.1).mirror()
    m.validate()
    assert np.all(m.vertices[:, 0] <= 1e-12)


def test_nested_levels_halve_size():
    ms = nested_meshes(Rectangle(1, 1), 0.1)
    assert [len(m.triangles) for m in ms[1:]] == [4 * len(m.triangles) for m in ms[:-1]]
    assert ms[-1].h == pytest.approx(ms[0].h / 4)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.5, 2.0), st.floats(0.5, 2.0), st.floats(0.08, 0.25))
def test_rectangle_mesh_area_property(a, b, h):
    m = triangulate(Rectangle(a, b), h)
    assert m.area() == pytest.approx(4 * a * b, rel=1e-12)
    assert m.h <= math.sqrt(2) * h * (1 + 1e-9)


def test_too_coarse_mesh_rejected():
    with pytest.raises(ResolutionError):
        triangulate(Rectangle(0.1, 0.1), 1.0)


def test_unbounded_domain_rejected():
    with pytest.raises(UnsupportedDomainError):
        triangulate(load_builtin("T"), 0.1)


def test_round_trip(tmp_path):
    m = triangulate(half_domain(Disk(1)), 0.2)
    vals = np.column_stack([m.vertices[:, 0], m.vertices[:, 1] ** 2])
    path = tmp_path / "mesh.txt"
    write_mesh(path, m, vals)
    m2, v2 = read_mesh(path)
    assert np.array_equal(m2.vertices, m.vertices)
    assert np.array_equal(m2.triangles, m.triangles)
    assert np.array_equal(m2.boundary_edges, m.boundary_edges)
    assert m2.edge_tags == m.edge_tags
    assert np.array_equal(v2, vals)
