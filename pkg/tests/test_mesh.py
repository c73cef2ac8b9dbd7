"""Mesh construction, isoparametric mapping, and boundary bookkeeping."""

import numpy as np
import pytest

from ifed2d.elements import ElementKind
from ifed2d.errors import MeshQualityError
from ifed2d.mesh import (
    StructuralMesh,
    generate_block_mesh,
    generate_cook_mesh,
    read_mesh_text,
    transform_mesh,
    write_mesh_text,
)


def test_single_q1_block_counts():
    m = generate_block_mesh(1.0, 1.0, 1, 1, ElementKind.Q1)
    assert m.n_nodes == 4
    assert m.n_elements == 1


def test_p1_block_counts():
    m = generate_block_mesh(1.0, 1.0, 2, 2, ElementKind.P1)
    assert m.n_nodes == 9
    assert m.n_elements == 8


@pytest.mark.parametrize("kind", list(ElementKind))
def test_every_node_used_and_boundary_flags(kind):
    m = generate_block_mesh(2.0, 1.0, 3, 2, kind)
    assert m.boundary_node_flags.sum() > 0
    # boundary nodes are exactly those on the rectangle outline
    x, y = m.nodes[:, 0], m.nodes[:, 1]
    on_rim = (np.isclose(x, 0) | np.isclose(x, 2) | np.isclose(y, 0) | np.isclose(y, 1))
    assert np.array_equal(m.boundary_node_flags, on_rim)


def test_identity_triangle_map_is_identity():
    m = StructuralMesh(ElementKind.P1, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
                       np.array([[0, 1, 2]]))
    xi = np.array([0.3, 0.4])
    assert np.allclose(m.map_to_physical(0, xi), xi)
    J = m.jacobian(0, xi)
    assert np.allclose(J, np.eye(2))


def test_rectangle_q1_jacobian_determinant():
    a, b = 3.0, 2.0
    m = generate_block_mesh(a, b, 1, 1, ElementKind.Q1)
    J = m.jacobian(0, (0.2, -0.3))
    det = np.linalg.det(J)
    assert det == pytest.approx(a * b / 4.0)


def test_scaled_triangle_jacobian():
    m = StructuralMesh(ElementKind.P1, np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]),
                       np.array([[0, 1, 2]]))
    assert np.linalg.det(m.jacobian(0, (0.25, 0.25))) == pytest.approx(4.0)


def test_inverted_element_rejected():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(MeshQualityError):
        StructuralMesh(ElementKind.P1, nodes, np.array([[0, 2, 1]]))  # clockwise


def test_bad_connectivity_rejected():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(MeshQualityError):
        StructuralMesh(ElementKind.P1, nodes, np.array([[0, 1, 7]]))


def test_unused_node_rejected():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    with pytest.raises(MeshQualityError):
        StructuralMesh(ElementKind.P1, nodes, np.array([[0, 1, 2]]))


def test_block_markers():
    m = generate_block_mesh(2.0, 1.0, 2, 2, ElementKind.Q1)
    markers = {f.marker for f in m.boundary_facets}
    assert markers == {"left", "right", "bottom", "top"}
    for f in m.boundary_facets:
        mid = m.nodes[m.facet_nodes(f)[:2]].mean(axis=0)
        if f.marker == "left":
            assert mid[0] == pytest.approx(0.0)
        if f.marker == "right":
            assert mid[0] == pytest.approx(2.0)


def test_cook_geometry_scaled_to_longest_side():
    m = generate_cook_mesh(6, ElementKind.Q1)
    # longest side of the classical trapezoid is the lower edge: 48-44-60
    # scaled so that edge has length 6.5
    span = np.array([48.0, 44.0])
    scale = 6.5 / np.linalg.norm(span)
    xs = m.nodes[:, 0]
    assert xs.max() - xs.min() == pytest.approx(48.0 * scale)
    markers = {f.marker for f in m.boundary_facets}
    assert "left" in markers and "right" in markers
    # classical trapezoid area 1440, scaled
    from ifed2d.quadrature import consistent_rule
    assert consistent_rule(m).total_weight() == pytest.approx(1440.0 * scale**2)


@pytest.mark.parametrize("kind", [ElementKind.P2, ElementKind.Q2])
def test_cook_quadratic_nodes_on_straight_sides(kind):
    m = generate_cook_mesh(3, kind)
    for conn in m.elements:
        sides = m.kind.sides
        for side in sides:
            a, b = m.nodes[conn[side[0]]], m.nodes[conn[side[1]]]
            mid = m.nodes[conn[side[2]]]
            assert np.allclose(mid, 0.5 * (a + b), atol=1e-12)


def test_longest_edge():
    m = generate_block_mesh(4.0, 1.0, 2, 1, ElementKind.Q1)
    assert m.longest_edge() == pytest.approx(2.0)


def test_mesh_text_roundtrip(tmp_path):
    m = generate_block_mesh(1.5, 1.0, 2, 3, ElementKind.P2)
    path = tmp_path / "mesh.txt"
    write_mesh_text(m, path)
    m2 = read_mesh_text(path)
    assert m2.kind == m.kind
    assert np.array_equal(m2.elements, m.elements)
    assert np.allclose(m2.nodes, m.nodes)
    assert len(m2.boundary_facets) == len(m.boundary_facets)
    assert {f.marker for f in m2.boundary_facets} == {f.marker for f in m.boundary_facets}


def test_transform_mesh_rigid():
    m = generate_block_mesh(2.0, 1.0, 2, 1, ElementKind.Q1)
    t = transform_mesh(m, rotation=np.pi / 6, translation=(1.0, -2.0))
    # lengths preserved
    assert t.longest_edge() == pytest.approx(m.longest_edge())
    assert len(t.boundary_facets) == len(m.boundary_facets)
