"""Reference elements and nodal shape functions for 2D Lagrange elements.

Supported kinds: linear/quadratic triangles (P1, P2) on the unit right
triangle and bilinear/biquadratic quadrilaterals (Q1, Q2) on [-1, 1]^2.
All bases are nodal interpolants: phi_i(node_j) = delta_ij.
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class ElementKind(Enum):
    P1 = "p1"
    P2 = "p2"
    Q1 = "q1"
    Q2 = "q2"

    @property
    def is_quad(self) -> bool:
        return self in (ElementKind.Q1, ElementKind.Q2)

    @property
    def degree(self) -> int:
        return 1 if self in (ElementKind.P1, ElementKind.Q1) else 2

    @property
    def node_count(self) -> int:
        return _NODE_COUNT[self]

    @property
    def reference_nodes(self) -> np.ndarray:
        """Nodal coordinates on the reference element, shape (n_nodes, 2)."""
        return _REFERENCE_NODES[self].copy()

    @property
    def corner_nodes(self) -> tuple[int, ...]:
        """Local indices of the geometric vertices."""
        return (0, 1, 2) if not self.is_quad else (0, 1, 2, 3)

    @property
    def sides(self) -> tuple[tuple[int, ...], ...]:
        """Local node indices of each side, corners first then mid-edge."""
        return _SIDES[self]

    @property
    def linear_subelements(self) -> tuple[tuple[int, ...], ...]:
        """Decomposition into linear sub-elements sharing this element's nodes.

        Degree-1 kinds decompose into themselves; quadratic kinds split at
        mid-edge (and center) nodes, which is what the composite-trapezoid
        nodal weights are built from.
        """
        return _SUBELEMENTS[self]


_NODE_COUNT = {
    ElementKind.P1: 3,
    ElementKind.P2: 6,
    ElementKind.Q1: 4,
    ElementKind.Q2: 9,
}

_REFERENCE_NODES = {
    ElementKind.P1: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    ElementKind.P2: np.array(
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0],
         [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]
    ),
    ElementKind.Q1: np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]),
    ElementKind.Q2: np.array(
        [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0],
         [0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0],
         [0.0, 0.0]]
    ),
}

_SIDES = {
    ElementKind.P1: ((0, 1), (1, 2), (2, 0)),
    ElementKind.P2: ((0, 1, 3), (1, 2, 4), (2, 0, 5)),
    ElementKind.Q1: ((0, 1), (1, 2), (2, 3), (3, 0)),
    ElementKind.Q2: ((0, 1, 4), (1, 2, 5), (2, 3, 6), (3, 0, 7)),
}

_SUBELEMENTS = {
    ElementKind.P1: ((0, 1, 2),),
    ElementKind.P2: ((0, 3, 5), (3, 1, 4), (5, 4, 2), (3, 4, 5)),
    ElementKind.Q1: ((0, 1, 2, 3),),
    ElementKind.Q2: ((0, 4, 8, 7), (4, 1, 5, 8), (8, 5, 2, 6), (7, 8, 6, 3)),
}


def _quadratic_1d(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the 1D Lagrange basis on nodes (-1, 0, 1)."""
    vals = np.stack([0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)], axis=-1)
    ders = np.stack([t - 0.5, -2.0 * t, t + 0.5], axis=-1)
    return vals, ders


# index into the 1D quadratic basis (-1, 0, +1) per local Q2 node, (xi, eta)
_Q2_1D_INDEX = np.array(
    [[0, 0], [2, 0], [2, 2], [0, 2], [1, 0], [2, 1], [1, 2], [0, 1], [1, 1]]
)


def shape_values(kind: ElementKind, points: np.ndarray) -> np.ndarray:
    """Evaluate all shape functions at reference points.

    points: (..., 2) array of reference coordinates.
    Returns (..., n_nodes).
    """
    pts = np.asarray(points, dtype=float)
    xi, eta = pts[..., 0], pts[..., 1]
    if kind is ElementKind.P1:
        return np.stack([1.0 - xi - eta, xi, eta], axis=-1)
    if kind is ElementKind.P2:
        lam = np.stack([1.0 - xi - eta, xi, eta], axis=-1)
        l0, l1, l2 = lam[..., 0], lam[..., 1], lam[..., 2]
        return np.stack(
            [l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
             4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0],
            axis=-1,
        )
    if kind is ElementKind.Q1:
        sx = np.stack([0.5 * (1 - xi), 0.5 * (1 + xi)], axis=-1)
        sy = np.stack([0.5 * (1 - eta), 0.5 * (1 + eta)], axis=-1)
        idx = np.array([[0, 0], [1, 0], [1, 1], [0, 1]])
        return sx[..., idx[:, 0]] * sy[..., idx[:, 1]]
    if kind is ElementKind.Q2:
        vx, _ = _quadratic_1d(xi)
        vy, _ = _quadratic_1d(eta)
        return vx[..., _Q2_1D_INDEX[:, 0]] * vy[..., _Q2_1D_INDEX[:, 1]]
    raise ValueError(f"unknown element kind {kind!r}")


def shape_gradients(kind: ElementKind, points: np.ndarray) -> np.ndarray:
    """Reference-space gradients of all shape functions.

    points: (..., 2). Returns (..., n_nodes, 2).
    """
    pts = np.asarray(points, dtype=float)
    xi, eta = pts[..., 0], pts[..., 1]
    one = np.ones_like(xi)
    zero = np.zeros_like(xi)
    if kind is ElementKind.P1:
        g = np.stack(
            [np.stack([-one, -one], axis=-1),
             np.stack([one, zero], axis=-1),
             np.stack([zero, one], axis=-1)],
            axis=-2,
        )
        return g
    if kind is ElementKind.P2:
        l0 = 1.0 - xi - eta
        # d(lam)/d(xi, eta): lam0 -> (-1,-1), lam1 -> (1,0), lam2 -> (0,1)
        d0 = np.stack([-(4 * l0 - 1), -(4 * l0 - 1)], axis=-1)
        d1 = np.stack([4 * xi - 1, zero], axis=-1)
        d2 = np.stack([zero, 4 * eta - 1], axis=-1)
        d01 = np.stack([4 * (l0 - xi), -4 * xi], axis=-1)
        d12 = np.stack([4 * eta, 4 * xi], axis=-1)
        d20 = np.stack([-4 * eta, 4 * (l0 - eta)], axis=-1)
        return np.stack([d0, d1, d2, d01, d12, d20], axis=-2)
    if kind is ElementKind.Q1:
        sx = np.stack([0.5 * (1 - xi), 0.5 * (1 + xi)], axis=-1)
        sy = np.stack([0.5 * (1 - eta), 0.5 * (1 + eta)], axis=-1)
        dx = np.stack([-0.5 * one, 0.5 * one], axis=-1)
        dy = np.stack([-0.5 * one, 0.5 * one], axis=-1)
        idx = np.array([[0, 0], [1, 0], [1, 1], [0, 1]])
        gx = dx[..., idx[:, 0]] * sy[..., idx[:, 1]]
        gy = sx[..., idx[:, 0]] * dy[..., idx[:, 1]]
        return np.stack([gx, gy], axis=-1)
    if kind is ElementKind.Q2:
        vx, dx = _quadratic_1d(xi)
        vy, dy = _quadratic_1d(eta)
        ix, iy = _Q2_1D_INDEX[:, 0], _Q2_1D_INDEX[:, 1]
        gx = dx[..., ix] * vy[..., iy]
        gy = vx[..., ix] * dy[..., iy]
        return np.stack([gx, gy], axis=-1)
    raise ValueError(f"unknown element kind {kind!r}")


def shape_value(kind: ElementKind, i: int, xi) -> float:
    """phi_i at a single reference point."""
    if not 0 <= i < kind.node_count:
        raise IndexError(f"basis index {i} out of range for {kind}")
    return float(shape_values(kind, np.asarray(xi, dtype=float))[..., i])


def shape_gradient(kind: ElementKind, i: int, xi) -> np.ndarray:
    """Reference-space gradient of phi_i at a single reference point."""
    if not 0 <= i < kind.node_count:
        raise IndexError(f"basis index {i} out of range for {kind}")
    return shape_gradients(kind, np.asarray(xi, dtype=float))[..., i, :]


def contains(kind: ElementKind, xi, tol: float = 1e-12) -> bool:
    """True if the reference point lies in the reference element."""
    x, y = float(xi[0]), float(xi[1])
    if kind.is_quad:
        return -1 - tol <= x <= 1 + tol and -1 - tol <= y <= 1 + tol
    return x >= -tol and y >= -tol and x + y <= 1 + tol


def random_reference_points(kind: ElementKind, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random points inside the reference element, shape (n, 2)."""
    if kind.is_quad:
        return rng.uniform(-1.0, 1.0, size=(n, 2))
    p = rng.uniform(0.0, 1.0, size=(n, 2))
    flip = p.sum(axis=1) > 1.0
    p[flip] = 1.0 - p[flip]
    return p
