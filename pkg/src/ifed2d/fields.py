"""Finite element fields: per-node 2-vector coefficients over a mesh."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elements import shape_values
from .mesh import StructuralMesh
from .quadrature import MeshQuadrature


@dataclass
class FEField:
    """Nodal coefficient field. Evaluating at node k returns coefficients[k]."""

    mesh: StructuralMesh
    values: np.ndarray          # (m, 2)
    role: str = "generic"       # deformation | velocity | force

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_nodes, 2):
            raise ValueError(
                f"coefficients must be ({self.mesh.n_nodes}, 2), got {self.values.shape}"
            )

    @classmethod
    def zeros(cls, mesh: StructuralMesh, role: str = "generic") -> "FEField":
        return cls(mesh, np.zeros((mesh.n_nodes, 2)), role)

    @classmethod
    def identity_deformation(cls, mesh: StructuralMesh) -> "FEField":
        return cls(mesh, mesh.nodes.copy(), "deformation")

    def copy(self) -> "FEField":
        return FEField(self.mesh, self.values.copy(), self.role)

    def evaluate(self, quad: MeshQuadrature) -> np.ndarray:
        """Field values at quadrature points, shape (Q, 2).

        Nodal rules short-circuit to the stored coefficients, which is
        exactly nodal interpolation.
        """
        if quad.node_ids is not None:
            return self.values[quad.node_ids]
        vals = shape_values(self.mesh.kind, quad.ref_points)     # (Q, n_local)
        coeffs = self.values[self.mesh.elements[quad.element_ids]]
        return np.einsum("qi,qia->qa", vals, coeffs)

    def evaluate_at(self, element_id: int, xi) -> np.ndarray:
        """Field value at one reference point of one element."""
        vals = shape_values(self.mesh.kind, np.asarray(xi, dtype=float))
        return vals @ self.values[self.mesh.elements[element_id]]
