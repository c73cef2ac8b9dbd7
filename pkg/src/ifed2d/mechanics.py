"""Structural kinematics, load vectors, mass operators, and force projection.

The load vector entries are L_i = -sum_q P(X_q) : grad_X phi_i(X_q) w_q over
a higher-order Gauss rule; the same L feeds both the consistent projection
(solve M F = L) and the inconsistent one (divide by the lumped diagonal).
Penalty tethers (surface and body) and dead-load surface tractions assemble
into the same load vector before projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.polynomial.legendre import leggauss

from .elements import ElementKind, shape_gradients, shape_values
from .errors import SolverError
from .fields import FEField
from .materials import Material, pk1_stress
from .mesh import BoundaryFacet, StructuralMesh
from .quadrature import MeshQuadrature, consistent_rule, nodal_rule


# ---------------------------------------------------------------------------
# quadrature-point geometry (cached per rule)
# ---------------------------------------------------------------------------

def quad_basis(quad: MeshQuadrature) -> tuple[np.ndarray, np.ndarray]:
    """Basis values and physical gradients at the rule's points.

    Returns (vals, gradX) with shapes (Q, n_local) and (Q, n_local, 2).
    Cached on the rule; reference geometry is immutable.
    """
    cached = getattr(quad, "_basis_cache", None)
    if cached is not None:
        return cached
    mesh = quad.mesh
    vals = shape_values(mesh.kind, quad.ref_points)
    grads = shape_gradients(mesh.kind, quad.ref_points)          # (Q, n, 2)
    coords = mesh.nodes[mesh.elements[quad.element_ids]]         # (Q, n, 2)
    J = np.einsum("qia,qib->qab", coords, grads)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    Jinv = np.empty_like(J)
    Jinv[:, 0, 0] = J[:, 1, 1]
    Jinv[:, 0, 1] = -J[:, 0, 1]
    Jinv[:, 1, 0] = -J[:, 1, 0]
    Jinv[:, 1, 1] = J[:, 0, 0]
    Jinv /= det[:, None, None]
    gradX = np.einsum("qib,qba->qia", grads, Jinv)
    quad._basis_cache = (vals, gradX)
    return vals, gradX


def deformation_gradients(chi: FEField, quad: MeshQuadrature) -> np.ndarray:
    """F_h = sum_l chi_l otimes grad_X phi_l at each point, (Q, 2, 2)."""
    _, gradX = quad_basis(quad)
    coeffs = chi.values[chi.mesh.elements[quad.element_ids]]     # (Q, n, 2)
    return np.einsum("qia,qib->qab", coeffs, gradX)


def deformation_gradient(chi: FEField, element_id: int, xi) -> np.ndarray:
    """F_h at a single reference point of one element."""
    mesh = chi.mesh
    grads = shape_gradients(mesh.kind, np.asarray(xi, dtype=float))
    J = mesh.jacobian(element_id, xi)
    gradX = grads @ np.linalg.inv(J)
    coeffs = chi.values[mesh.elements[element_id]]
    return np.einsum("ia,ib->ab", coeffs, gradX)


# ---------------------------------------------------------------------------
# load vector
# ---------------------------------------------------------------------------

def assemble_load_vector(chi: FEField, material: Material,
                         hq: MeshQuadrature) -> np.ndarray:
    """L_i = -sum_q P(X_q) : grad_X phi_i(X_q) w_q, shape (m, 2)."""
    F = deformation_gradients(chi, hq)
    P = pk1_stress(material, F, element_ids=hq.element_ids)
    return assemble_stress_load(chi.mesh, P, hq)


def assemble_stress_load(mesh: StructuralMesh, P: np.ndarray,
                         hq: MeshQuadrature) -> np.ndarray:
    """Load vector for given per-point PK1 stresses (test injection point)."""
    _, gradX = quad_basis(hq)
    contrib = -np.einsum("qdj,qij,q->qid", P, gradX, hq.weights)
    L = np.zeros((mesh.n_nodes, 2))
    np.add.at(L, mesh.elements[hq.element_ids], contrib)
    return L


# ---------------------------------------------------------------------------
# mass operators
# ---------------------------------------------------------------------------

@dataclass
class MassOperator:
    kind: str                               # "consistent" | "lumped"
    mesh: StructuralMesh
    matrix: sp.csr_matrix | None = None     # scalar m x m block
    diag: np.ndarray | None = None          # (m,)
    solve_iterations: int = 0               # cumulative CG iteration count
    solve_calls: int = 0
    _factor: object = field(default=None, repr=False)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        if self.kind == "lumped":
            return vec * self.diag[:, None]
        return np.column_stack([self.matrix @ vec[:, 0], self.matrix @ vec[:, 1]])

    def solve(self, rhs: np.ndarray, tol: float = 1e-10,
              method: str = "cg", maxiter: int = 2000) -> np.ndarray:
        """Solve M x = rhs columnwise. Lumped solves are elementwise division."""
        if self.kind == "lumped":
            return rhs / self.diag[:, None]
        if method == "direct":
            if self._factor is None:
                self._factor = spla.factorized(self.matrix.tocsc())
            return np.column_stack([self._factor(rhs[:, 0]), self._factor(rhs[:, 1])])
        out = np.empty_like(rhs)
        Mdiag = self.matrix.diagonal()
        precond = spla.LinearOperator(self.matrix.shape, lambda v: v / Mdiag)
        for c in range(rhs.shape[1]):
            b = rhs[:, c]
            bnorm = np.linalg.norm(b)
            if bnorm == 0.0:
                out[:, c] = 0.0
                continue
            iters = 0

            def count(_xk):
                nonlocal iters
                iters += 1

            x, info = spla.cg(self.matrix, b, rtol=tol, atol=0.0,
                              maxiter=maxiter, M=precond, callback=count)
            self.solve_iterations += iters
            self.solve_calls += 1
            if info != 0:
                res = float(np.linalg.norm(b - self.matrix @ x) / bnorm)
                raise SolverError("mass-matrix CG did not converge",
                                  residual=res, iterations=iters)
            out[:, c] = x
        return out

    def diagonal(self) -> np.ndarray:
        if self.kind == "lumped":
            return self.diag
        return self.matrix.diagonal()


def assemble_mass(mesh: StructuralMesh, kind: str = "consistent",
                  rule: MeshQuadrature | None = None) -> MassOperator:
    """Consistent (sparse SPD) or lumped (diagonal, positive) mass operator."""
    if kind == "lumped":
        rule = rule if rule is not None else nodal_rule(mesh)
        diag = np.zeros(mesh.n_nodes)
        diag[rule.node_ids] = rule.weights
        return MassOperator("lumped", mesh, diag=diag)
    if kind != "consistent":
        raise ValueError(f"unknown mass kind {kind!r}")
    rule = rule if rule is not None else consistent_rule(mesh)
    vals, _ = quad_basis(rule)                                   # (Q, n)
    conn = mesh.elements[rule.element_ids]                       # (Q, n)
    blocks = np.einsum("qi,qj,q->qij", vals, vals, rule.weights)
    n = mesh.kind.node_count
    rows = np.repeat(conn, n, axis=1).ravel()
    cols = np.tile(conn, (1, n)).ravel()
    mat = sp.coo_matrix((blocks.ravel(), (rows, cols)),
                        shape=(mesh.n_nodes, mesh.n_nodes)).tocsr()
    return MassOperator("consistent", mesh, matrix=mat)


def project_force(L: np.ndarray, mass: MassOperator, tol: float = 1e-10,
                  method: str = "cg") -> FEField:
    """Force coefficients from the load vector under the given mass."""
    return FEField(mass.mesh, mass.solve(L, tol=tol, method=method), "force")


# ---------------------------------------------------------------------------
# boundary facets: tethers and applied tractions
# ---------------------------------------------------------------------------

@dataclass
class FacetQuadrature:
    element_ids: np.ndarray     # (Q,)
    basis: np.ndarray           # (Q, n_local)
    weights: np.ndarray         # (Q,) reference arclength weights
    points: np.ndarray          # (Q, 2) reference-config positions


def facet_quadrature(mesh: StructuralMesh, facets: list[BoundaryFacet],
                     n_points: int | None = None) -> FacetQuadrature:
    """Gauss rule along reference boundary facets (straight in ref space)."""
    kind = mesh.kind
    n_points = n_points if n_points is not None else kind.degree + 2
    t, wt = leggauss(n_points)
    ref_nodes = kind.reference_nodes
    ids, bas, wts, pts = [], [], [], []
    for f in facets:
        side = kind.sides[f.side]
        a, b = ref_nodes[side[0]], ref_nodes[side[1]]
        ref_pts = 0.5 * (1 - t)[:, None] * a + 0.5 * (1 + t)[:, None] * b
        vals = shape_values(kind, ref_pts)                       # (k, n_local)
        grads = shape_gradients(kind, ref_pts)
        coords = mesh.nodes[mesh.elements[f.element]]
        J = np.einsum("ia,kib->kab", coords, grads)
        tangent_ref = 0.5 * (b - a)
        dxdt = np.einsum("kab,b->ka", J, tangent_ref)
        scale = np.linalg.norm(dxdt, axis=1)
        ids.append(np.full(n_points, f.element, dtype=np.intp))
        bas.append(vals)
        wts.append(wt * scale)
        pts.append(vals @ coords)
    if not facets:
        return FacetQuadrature(np.zeros(0, dtype=np.intp), np.zeros((0, kind.node_count)),
                               np.zeros(0), np.zeros((0, 2)))
    return FacetQuadrature(np.concatenate(ids), np.vstack(bas),
                           np.concatenate(wts), np.vstack(pts))


def _facet_field_values(mesh, fq: FacetQuadrature, nodal: np.ndarray) -> np.ndarray:
    coeffs = nodal[mesh.elements[fq.element_ids]]
    return np.einsum("qi,qia->qa", fq.basis, coeffs)


def add_surface_tether(L: np.ndarray, mesh: StructuralMesh, fq: FacetQuadrature,
                       chi: np.ndarray, velocity: np.ndarray, target: np.ndarray,
                       kappa: float, eta: float, mask=(1.0, 1.0)) -> None:
    """Accumulate facet integrals of kappa (target - chi) - eta U into L.

    `mask` selects components, e.g. (0, 1) tethers only the y-coordinate.
    """
    chi_q = _facet_field_values(mesh, fq, chi)
    tgt_q = _facet_field_values(mesh, fq, target)
    u_q = _facet_field_values(mesh, fq, velocity)
    force = (kappa * (tgt_q - chi_q) - eta * u_q) * np.asarray(mask, dtype=float)
    contrib = np.einsum("qd,qi,q->qid", force, fq.basis, fq.weights)
    np.add.at(L, mesh.elements[fq.element_ids], contrib)


def add_surface_traction(L: np.ndarray, mesh: StructuralMesh, fq: FacetQuadrature,
                         traction) -> None:
    """Dead-load traction per unit reference length on boundary facets."""
    t = np.asarray(traction, dtype=float)
    tq = np.broadcast_to(t, (fq.points.shape[0], 2)) if t.ndim == 1 else t
    contrib = np.einsum("qd,qi,q->qid", tq, fq.basis, fq.weights)
    np.add.at(L, mesh.elements[fq.element_ids], contrib)


def add_body_tether(L: np.ndarray, rule: MeshQuadrature, chi: FEField,
                    velocity: FEField, target: np.ndarray,
                    kappa: float, eta: float, mask=(1.0, 1.0)) -> None:
    """Volume tether kappa (target - chi) - eta U integrated with `rule`."""
    mesh = rule.mesh
    vals, _ = quad_basis(rule)
    chi_q = chi.evaluate(rule)
    u_q = velocity.evaluate(rule)
    tgt_field = FEField(mesh, np.asarray(target, dtype=float))
    tgt_q = tgt_field.evaluate(rule)
    force = (kappa * (tgt_q - chi_q) - eta * u_q) * np.asarray(mask, dtype=float)
    contrib = np.einsum("qd,qi,q->qid", force, vals, rule.weights)
    np.add.at(L, mesh.elements[rule.element_ids], contrib)
