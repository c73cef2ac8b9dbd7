"""Mesh-global quadrature families over a structural mesh.

Four families are provided: consistent Gauss rules (exact for products of
basis functions), higher-order Gauss rules for load vectors, deformation-
adaptive rules that refine until deformed point spacing resolves the
Cartesian grid, and nodal rules whose points are the mesh nodes.

All rules are stored flat: one (element, reference point, physical point,
weight) record per quadrature point, with weights carrying the reference
Jacobian so that sum(w) equals the reference area for the Gauss families.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .elements import ElementKind, shape_gradients, shape_values
from .errors import RefinementCapError, UnsupportedConfigurationError
from .mesh import StructuralMesh


class QuadratureFamily(Enum):
    CONSISTENT = "consistent"
    HIGHER_ORDER = "higher-order"
    ADAPTIVE = "adaptive"
    NODAL = "nodal"


@dataclass
class MeshQuadrature:
    family: QuadratureFamily
    mesh: StructuralMesh
    element_ids: np.ndarray      # (Q,) owning element per point
    ref_points: np.ndarray       # (Q, 2) reference coordinates in the owner
    points: np.ndarray           # (Q, 2) reference-configuration positions X_q
    weights: np.ndarray          # (Q,)
    node_ids: np.ndarray | None = None   # nodal family: mesh node per point

    @property
    def n_points(self) -> int:
        return self.weights.shape[0]

    def total_weight(self) -> float:
        return float(self.weights.sum())


# ---------------------------------------------------------------------------
# reference rules
# ---------------------------------------------------------------------------

# symmetric triangle rules on the unit right triangle (area 1/2), by degree;
# barycentric-style orbit data (weights normalized to sum to 1, scaled by 1/2)
_TRI_RULES = {
    1: [(1.0, (1 / 3, 1 / 3))],
    2: [(1 / 3, (1 / 6, 1 / 6)), (1 / 3, (2 / 3, 1 / 6)), (1 / 3, (1 / 6, 2 / 3))],
    4: [
        (0.223381589678011, (0.445948490915965, 0.445948490915965)),
        (0.223381589678011, (0.108103018168070, 0.445948490915965)),
        (0.223381589678011, (0.445948490915965, 0.108103018168070)),
        (0.109951743655322, (0.091576213509771, 0.091576213509771)),
        (0.109951743655322, (0.816847572980459, 0.091576213509771)),
        (0.109951743655322, (0.091576213509771, 0.816847572980459)),
    ],
    5: [
        (0.225, (1 / 3, 1 / 3)),
        (0.132394152788506, (0.470142064105115, 0.470142064105115)),
        (0.132394152788506, (0.059715871789770, 0.470142064105115)),
        (0.132394152788506, (0.470142064105115, 0.059715871789770)),
        (0.125939180544827, (0.101286507323456, 0.101286507323456)),
        (0.125939180544827, (0.797426985353087, 0.101286507323456)),
        (0.125939180544827, (0.101286507323456, 0.797426985353087)),
    ],
}

_MAX_ORDER = 40


@lru_cache(maxsize=None)
def _reference_rule(kind_value: str, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights on the reference element, exact to `order`."""
    kind = ElementKind(kind_value)
    if order < 1 or order > _MAX_ORDER:
        raise UnsupportedConfigurationError(
            f"quadrature order {order} outside supported range 1..{_MAX_ORDER}"
        )
    if kind.is_quad:
        n = (order + 2) // 2
        x, w = leggauss(n)
        pts = np.array([[xi, eta] for eta in x for xi in x])
        wts = np.array([wi * wj for wj in w for wi in w])
        return pts, wts
    for deg in sorted(_TRI_RULES):
        if deg >= order:
            rule = _TRI_RULES[deg]
            pts = np.array([p for _, p in rule])
            wts = 0.5 * np.array([w for w, _ in rule])
            return pts, wts
    return _duffy_rule((order + 3) // 2)


@lru_cache(maxsize=None)
def _duffy_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed n-by-n Gauss rule on the unit right triangle.

    Exact for total degree 2n - 2; all weights positive.
    """
    x, w = leggauss(n)
    a = 0.5 * (x + 1.0)          # [0, 1]
    wa = 0.5 * w
    pts, wts = [], []
    for i in range(n):
        for j in range(n):
            xi = a[i] * (1.0 - a[j])
            eta = a[j]
            pts.append((xi, eta))
            wts.append(wa[i] * wa[j] * (1.0 - a[j]))
    return np.asarray(pts), np.asarray(wts)


# ---------------------------------------------------------------------------
# rule constructors
# ---------------------------------------------------------------------------

def _deploy(mesh: StructuralMesh, ref_pts: np.ndarray, ref_wts: np.ndarray,
            family: QuadratureFamily) -> MeshQuadrature:
    """Replicate a shared reference rule over every element of the mesh."""
    E, k = mesh.n_elements, ref_pts.shape[0]
    _, detJ = mesh.jacobians_at(ref_pts)                  # (E, k)
    vals = shape_values(mesh.kind, ref_pts)               # (k, n_local)
    phys = np.einsum("ki,eia->eka", vals, mesh.element_coords())
    element_ids = np.repeat(np.arange(E, dtype=np.intp), k)
    ref_points = np.tile(ref_pts, (E, 1))
    weights = (detJ * ref_wts[None, :]).ravel()
    return MeshQuadrature(family, mesh, element_ids, ref_points,
                          phys.reshape(-1, 2), weights)


def gauss_rule(mesh: StructuralMesh, order: int,
               family: QuadratureFamily = QuadratureFamily.CONSISTENT) -> MeshQuadrature:
    """Mesh-global Gauss rule exact for polynomials up to `order`."""
    ref_pts, ref_wts = _reference_rule(mesh.kind.value, order)
    return _deploy(mesh, ref_pts, ref_wts, family)


def consistent_rule(mesh: StructuralMesh) -> MeshQuadrature:
    """Rule exact for all products phi_i * phi_j (mass-matrix exactness)."""
    return gauss_rule(mesh, 2 * mesh.kind.degree, QuadratureFamily.CONSISTENT)


def higher_order_rule(mesh: StructuralMesh) -> MeshQuadrature:
    """Load-vector rule, at least as accurate as FE interpolation."""
    return gauss_rule(mesh, 2 * mesh.kind.degree, QuadratureFamily.HIGHER_ORDER)


def nodal_rule(mesh: StructuralMesh, weights: str = "auto") -> MeshQuadrature:
    """One point per mesh node with basis-integral weights.

    weights='auto' uses exact integrals of phi for degree-1 kinds and
    composite-trapezoid weights (subdivide each quadratic element into the
    linear sub-elements sharing its nodes) for degree-2 kinds, which keeps
    every weight positive. weights='exact' integrates phi exactly for all
    kinds, which yields zero vertex weights for P2; any nonpositive weight
    is then replaced by 1.
    """
    if weights not in ("auto", "exact"):
        raise UnsupportedConfigurationError(f"unknown nodal weight mode {weights!r}")
    m = mesh.n_nodes
    w = np.zeros(m)
    if weights == "exact" or mesh.kind.degree == 1:
        rule_pts, rule_wts = _reference_rule(mesh.kind.value, 2 * mesh.kind.degree)
        _, detJ = mesh.jacobians_at(rule_pts)             # (E, k)
        vals = shape_values(mesh.kind, rule_pts)          # (k, n_local)
        contrib = np.einsum("ek,ki->ei", detJ * rule_wts[None, :], vals)
        np.add.at(w, mesh.elements.ravel(), contrib.ravel())
    else:
        w = _composite_trapezoid_weights(mesh)
    # exact-arithmetic zeros (P2/Q2 vertex integrals) come out as roundoff;
    # treat anything at roundoff scale as nonpositive before the w-tilde swap
    scale = np.abs(w).mean()
    w_tilde = np.where(w > 1e-12 * scale, w, 1.0)

    # pick one owning element + local reference coordinate per node
    owner = np.full(m, -1, dtype=np.intp)
    local = np.zeros((m, 2))
    ref_nodes = mesh.kind.reference_nodes
    for e in range(mesh.n_elements):
        for i, node in enumerate(mesh.elements[e]):
            if owner[node] < 0:
                owner[node] = e
                local[node] = ref_nodes[i]
    return MeshQuadrature(QuadratureFamily.NODAL, mesh, owner, local,
                          mesh.nodes.copy(), w_tilde,
                          node_ids=np.arange(m, dtype=np.intp))


def _composite_trapezoid_weights(mesh: StructuralMesh) -> np.ndarray:
    """Nodal weights from linear sub-elements of each quadratic element."""
    w = np.zeros(mesh.n_nodes)
    subs = mesh.kind.linear_subelements
    tri = len(subs[0]) == 3
    for conn in mesh.elements:
        for sub in subs:
            ids = conn[list(sub)]
            pts = mesh.nodes[ids]
            if tri:
                area = 0.5 * abs(
                    (pts[1, 0] - pts[0, 0]) * (pts[2, 1] - pts[0, 1])
                    - (pts[2, 0] - pts[0, 0]) * (pts[1, 1] - pts[0, 1])
                )
                w[ids] += area / 3.0
            else:
                # shoelace area of the bilinear sub-quad; vertex weight |k|/4
                x, y = pts[:, 0], pts[:, 1]
                area = 0.5 * abs(
                    np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))
                )
                w[ids] += area / 4.0
    return w


def adaptive_rule(mesh: StructuralMesh, deformation: np.ndarray, dx: float,
                  c_a: float = 0.5, cap: int = 48) -> MeshQuadrature:
    """Per-element Gauss rule refined until deformed spacing <= c_a * dx.

    `deformation` holds deformed nodal positions, shape (m, 2). The spacing
    estimate divides deformed corner-vertex distances by the points per
    direction, so densification is keyed to element size rather than
    per-point searches; a 0.9 safety factor on the target spacing absorbs
    the uneven gaps of Gauss nodes. The point count per direction never
    drops below the consistent rule's order and raising it past `cap`
    raises RefinementCapError.
    """
    if dx <= 0 or c_a <= 0:
        raise ValueError("dx and c_a must be positive")
    chi = np.asarray(deformation, dtype=float)
    kind = mesh.kind
    n_floor = kind.degree + 1
    target = 0.9 * c_a * dx

    corners = np.array(kind.corner_nodes)
    def_corners = chi[mesh.elements[:, corners]]          # (E, 4 or 3, 2)

    if kind.is_quad:
        hx = np.maximum(
            np.linalg.norm(def_corners[:, 1] - def_corners[:, 0], axis=1),
            np.linalg.norm(def_corners[:, 2] - def_corners[:, 3], axis=1),
        )
        hy = np.maximum(
            np.linalg.norm(def_corners[:, 3] - def_corners[:, 0], axis=1),
            np.linalg.norm(def_corners[:, 2] - def_corners[:, 1], axis=1),
        )
        h_dirs = np.stack([hx, hy], axis=1)
    else:
        e01 = np.linalg.norm(def_corners[:, 1] - def_corners[:, 0], axis=1)
        e12 = np.linalg.norm(def_corners[:, 2] - def_corners[:, 1], axis=1)
        e20 = np.linalg.norm(def_corners[:, 0] - def_corners[:, 2], axis=1)
        h = np.max(np.stack([e01, e12, e20], axis=1), axis=1)
        h_dirs = np.stack([h, h], axis=1)

    n_per_elem = np.maximum(n_floor, np.ceil(h_dirs / target).astype(int))
    if n_per_elem.max() > cap:
        e = int(np.argwhere(n_per_elem > cap)[0][0])
        raise RefinementCapError(
            f"element {e} needs {n_per_elem.max()} points per direction (cap {cap}); "
            f"deformed size {h_dirs[e].max():.3g}, target spacing {target:.3g}"
        )

    base_pts, base_wts = _reference_rule(kind.value, 2 * kind.degree)
    ids, refs, wts = [], [], []
    for e in range(mesh.n_elements):
        nx, ny = n_per_elem[e]
        if nx == n_floor and ny == n_floor:
            rp, rw = base_pts, base_wts
        elif kind.is_quad:
            xg, wgx = leggauss(int(nx))
            yg, wgy = leggauss(int(ny))
            rp = np.array([[xi, eta] for eta in yg for xi in xg])
            rw = np.array([wi * wj for wj in wgy for wi in wgx])
        else:
            rp, rw = _duffy_rule(int(max(nx, ny)))
        ids.append(np.full(rp.shape[0], e, dtype=np.intp))
        refs.append(rp)
        wts.append(rw)

    element_ids = np.concatenate(ids)
    ref_points = np.concatenate(refs)
    ref_weights = np.concatenate(wts)
    vals = shape_values(kind, ref_points)                 # (Q, n_local)
    coords = mesh.nodes[mesh.elements[element_ids]]       # (Q, n_local, 2)
    phys = np.einsum("qi,qia->qa", vals, coords)
    grads = shape_gradients(kind, ref_points)
    J = np.einsum("qia,qib->qab", coords, grads)
    detJ = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    return MeshQuadrature(QuadratureFamily.ADAPTIVE, mesh, element_ids,
                          ref_points, phys, detJ * ref_weights)
