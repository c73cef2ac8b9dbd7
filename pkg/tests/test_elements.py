"""Shape function tests: nodal interpolation, partition of unity, gradients.

Gradient correctness is checked against centered finite differences of the
shape values, and a few hand-derived values (barycentric derivatives for P1).
"""

import numpy as np
import pytest

from ifed2d.elements import (
    ElementKind,
    random_reference_points,
    shape_gradient,
    shape_gradients,
    shape_value,
    shape_values,
)

ALL_KINDS = list(ElementKind)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_kronecker_property(kind):
    nodes = kind.reference_nodes
    vals = shape_values(kind, nodes)
    assert np.abs(vals - np.eye(kind.node_count)).max() <= 1e-14


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_partition_of_unity_random_points(kind):
    rng = np.random.default_rng(1234)
    pts = random_reference_points(kind, 100, rng)
    vals = shape_values(kind, pts)
    grads = shape_gradients(kind, pts)
    assert np.abs(vals.sum(axis=-1) - 1.0).max() <= 1e-14
    assert np.linalg.norm(grads.sum(axis=-2), axis=-1).max() <= 1e-12


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_gradient_matches_finite_differences(kind):
    rng = np.random.default_rng(99)
    pts = random_reference_points(kind, 20, rng) * 0.9 + 0.02
    h = 1e-6
    for p in pts:
        g = shape_gradients(kind, p)
        for d in range(2):
            dp = np.zeros(2)
            dp[d] = h
            fd = (shape_values(kind, p + dp) - shape_values(kind, p - dp)) / (2 * h)
            assert np.abs(g[:, d] - fd).max() < 1e-6


def test_p1_vertex_value_and_barycenter():
    assert shape_value(ElementKind.P1, 0, (0.0, 0.0)) == 1.0
    center = (1 / 3, 1 / 3)
    for i in range(3):
        assert shape_value(ElementKind.P1, i, center) == pytest.approx(1 / 3)


def test_q1_center_value():
    for i in range(4):
        assert shape_value(ElementKind.Q1, i, (0.0, 0.0)) == pytest.approx(0.25)


def test_p1_gradient_is_barycentric_derivative():
    # vertex 0 basis is 1 - xi - eta on the unit right triangle
    g = shape_gradient(ElementKind.P1, 0, (0.3, 0.2))
    assert np.allclose(g, [-1.0, -1.0])


def test_p2_vertex_gradient_matches_fd_oracle():
    # gradient of the vertex basis at its own vertex
    kind = ElementKind.P2
    vtx = np.array([0.0, 0.0])
    h = 1e-7
    fd = np.array([
        (shape_value(kind, 0, vtx + [h, 0]) - shape_value(kind, 0, vtx)) / h,
        (shape_value(kind, 0, vtx + [0, h]) - shape_value(kind, 0, vtx)) / h,
    ])
    g = shape_gradient(kind, 0, vtx)
    assert np.allclose(g, fd, atol=1e-5)
    assert np.allclose(g, [-3.0, -3.0])  # d/dxi of lam0*(2 lam0 - 1) at lam0 = 1


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_out_of_range_basis_index_raises(kind):
    with pytest.raises(IndexError):
        shape_value(kind, kind.node_count, (0.1, 0.1))
    with pytest.raises(IndexError):
        shape_gradient(kind, -1, (0.1, 0.1))
