"""Unstructured 2D structural meshes with isoparametric geometry.

A mesh stores nodal coordinates in the reference configuration, element
connectivity for a single element kind, and labeled boundary facets.
Meshes are immutable after construction and validated against inverted
elements at build time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elements import ElementKind, shape_gradients, shape_values
from .errors import MeshQualityError


@dataclass(frozen=True)
class BoundaryFacet:
    element: int
    side: int
    marker: str


@dataclass
class StructuralMesh:
    kind: ElementKind
    nodes: np.ndarray                      # (m, 2) float
    elements: np.ndarray                   # (n_elem, n_local) int
    boundary_facets: list[BoundaryFacet] = field(default_factory=list)
    boundary_node_flags: np.ndarray | None = None

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.intp)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise MeshQualityError("nodes must be an (m, 2) array")
        if self.elements.ndim != 2 or self.elements.shape[1] != self.kind.node_count:
            raise MeshQualityError(
                f"connectivity must be (n, {self.kind.node_count}) for {self.kind}"
            )
        if self.elements.size and (
            self.elements.min() < 0 or self.elements.max() >= self.n_nodes
        ):
            raise MeshQualityError("element connectivity indexes invalid nodes")
        used = np.zeros(self.n_nodes, dtype=bool)
        used[self.elements.ravel()] = True
        if not used.all():
            raise MeshQualityError("mesh has nodes not referenced by any element")
        if self.boundary_node_flags is None:
            self.boundary_node_flags = self._compute_boundary(self.boundary_facets)
        self._validate_jacobians()

    # -- basic queries -------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    def element_coords(self, elem_ids=None) -> np.ndarray:
        """Node coordinates per element, (n_elem, n_local, 2)."""
        conn = self.elements if elem_ids is None else self.elements[elem_ids]
        return self.nodes[conn]

    def longest_edge(self) -> float:
        """Longest element edge over the mesh (the structural spacing DX)."""
        h = 0.0
        for side in self.kind.sides:
            a, b = side[0], side[1]
            pts = self.nodes[self.elements]
            d = np.linalg.norm(pts[:, a] - pts[:, b], axis=1)
            h = max(h, float(d.max()))
        return h

    # -- isoparametric geometry -----------------------------------------
    def map_to_physical(self, element_id: int, xi) -> np.ndarray:
        """x(xi) = sum_i node_i phi_i(xi); xi may be (2,) or (k, 2)."""
        vals = shape_values(self.kind, np.asarray(xi, dtype=float))
        return vals @ self.nodes[self.elements[element_id]]

    def jacobian(self, element_id: int, xi) -> np.ndarray:
        """d x / d xi at the reference point, shape (..., 2, 2)."""
        grads = shape_gradients(self.kind, np.asarray(xi, dtype=float))
        coords = self.nodes[self.elements[element_id]]
        # J[a, b] = sum_i coords[i, a] * dphi_i/dxi_b
        return np.einsum("ia,...ib->...ab", coords, grads)

    def jacobians_at(self, ref_points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Jacobians and determinants at shared reference points for all elements.

        ref_points: (k, 2). Returns (J, detJ) with J (n_elem, k, 2, 2) and
        detJ (n_elem, k).
        """
        grads = shape_gradients(self.kind, ref_points)      # (k, n_local, 2)
        coords = self.nodes[self.elements]                  # (E, n_local, 2)
        J = np.einsum("eia,kib->ekab", coords, grads)
        detJ = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        return J, detJ

    def _validate_jacobians(self):
        if self.n_elements == 0:
            return
        probes = np.vstack(
            [self.kind.reference_nodes, self.kind.reference_nodes.mean(axis=0)]
        )
        _, detJ = self.jacobians_at(probes)
        if not (detJ > 0).all():
            bad = int(np.argwhere(detJ <= 0)[0][0])
            raise MeshQualityError(
                f"element {bad} has nonpositive Jacobian determinant "
                f"(min det J = {detJ.min():.3e})"
            )

    # -- boundary handling ----------------------------------------------
    def facet_nodes(self, facet: BoundaryFacet) -> np.ndarray:
        return self.elements[facet.element][list(self.kind.sides[facet.side])]

    def _compute_boundary(self, facets: list[BoundaryFacet]) -> np.ndarray:
        flags = np.zeros(self.n_nodes, dtype=bool)
        if facets:
            for f in facets:
                flags[self.facet_nodes(f)] = True
            return flags
        # fall back to topology: a side is boundary iff owned by one element
        for elem, side, _marker in _free_sides(self):
            nodes = self.elements[elem][list(self.kind.sides[side])]
            flags[nodes] = True
        return flags


def _free_sides(mesh: StructuralMesh):
    """Yield (element, side, '') for sides not shared between two elements."""
    seen: dict[tuple, list[tuple[int, int]]] = {}
    for e in range(mesh.n_elements):
        for s, side in enumerate(mesh.kind.sides):
            corners = tuple(sorted(mesh.elements[e][list(side[:2])]))
            seen.setdefault(corners, []).append((e, s))
    for owners in seen.values():
        if len(owners) == 1:
            yield owners[0][0], owners[0][1], ""


def detect_boundary_facets(mesh_nodes, elements, kind: ElementKind,
                           marker_fn=None) -> list[BoundaryFacet]:
    """Find unshared element sides and label them via marker_fn(midpoint)."""
    seen: dict[tuple, list[tuple[int, int]]] = {}
    for e in range(len(elements)):
        for s, side in enumerate(kind.sides):
            corners = tuple(sorted(int(elements[e][i]) for i in side[:2]))
            seen.setdefault(corners, []).append((e, s))
    facets = []
    for corners, owners in seen.items():
        if len(owners) != 1:
            continue
        e, s = owners[0]
        mid = 0.5 * (mesh_nodes[corners[0]] + mesh_nodes[corners[1]])
        marker = marker_fn(mid) if marker_fn else ""
        facets.append(BoundaryFacet(e, s, marker))
    facets.sort(key=lambda f: (f.element, f.side))
    return facets


# ---------------------------------------------------------------------------
# structured generators
# ---------------------------------------------------------------------------

def generate_block_mesh(width: float, height: float, nx: int, ny: int,
                        kind: ElementKind, origin=(0.0, 0.0)) -> StructuralMesh:
    """Structured block mesh of nx-by-ny cells with the requested elements.

    Boundary facets carry markers 'left', 'right', 'bottom', 'top'.
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    ox, oy = float(origin[0]), float(origin[1])

    def marker(mid):
        tol = 1e-9 * max(width, height, 1.0)
        if abs(mid[0] - ox) < tol:
            return "left"
        if abs(mid[0] - (ox + width)) < tol:
            return "right"
        if abs(mid[1] - oy) < tol:
            return "bottom"
        return "top"

    nodes, elements = _structured_grid(width, height, nx, ny, kind, (ox, oy))
    facets = detect_boundary_facets(nodes, elements, kind, marker)
    return StructuralMesh(kind, nodes, elements, facets)


def generate_cook_mesh(n: int, kind: ElementKind, longest_side: float = 6.5,
                       domain_size: float = 10.0) -> StructuralMesh:
    """Swept-and-tapered quadrilateral (Cook geometry) meshed n-by-n.

    The classical 48/44/60 trapezoid is scaled so its longest side equals
    `longest_side` and centered in a square domain of `domain_size`.
    Markers: 'left' (fixed side), 'right' (loaded side), 'bottom', 'top'.
    """
    nodes, elements = _structured_grid(1.0, 1.0, n, n, kind, (0.0, 0.0))
    s, t = nodes[:, 0], nodes[:, 1]
    x = 48.0 * s
    y = 44.0 * s + 44.0 * t - 28.0 * s * t
    scale = longest_side / float(np.hypot(48.0, 44.0))
    x = x * scale
    y = y * scale
    x += 0.5 * (domain_size - x.max())
    y += 0.5 * (domain_size - y.max())
    mapped = np.column_stack([x, y])
    if kind.degree == 2:
        _snap_quadratic_nodes(mapped, elements, kind)
    xmin, xmax = mapped[:, 0].min(), mapped[:, 0].max()

    def marker(mid):
        tol = 1e-9 * domain_size
        if abs(mid[0] - xmin) < tol:
            return "left"
        if abs(mid[0] - xmax) < tol:
            return "right"
        return "bottom" if mid[1] < 0.5 * domain_size else "top"

    facets = detect_boundary_facets(mapped, elements, kind, marker)
    return StructuralMesh(kind, mapped, elements, facets)


def _structured_grid(width, height, nx, ny, kind: ElementKind, origin):
    """Node array and connectivity for a structured block."""
    ox, oy = origin
    if kind is ElementKind.Q1:
        xs = np.linspace(ox, ox + width, nx + 1)
        ys = np.linspace(oy, oy + height, ny + 1)
        gid = lambda i, j: j * (nx + 1) + i
        nodes = np.array([[x, y] for y in ys for x in xs])
        elements = [
            [gid(i, j), gid(i + 1, j), gid(i + 1, j + 1), gid(i, j + 1)]
            for j in range(ny) for i in range(nx)
        ]
    elif kind is ElementKind.P1:
        xs = np.linspace(ox, ox + width, nx + 1)
        ys = np.linspace(oy, oy + height, ny + 1)
        gid = lambda i, j: j * (nx + 1) + i
        nodes = np.array([[x, y] for y in ys for x in xs])
        elements = []
        for j in range(ny):
            for i in range(nx):
                a, b = gid(i, j), gid(i + 1, j)
                c, d = gid(i + 1, j + 1), gid(i, j + 1)
                elements += [[a, b, c], [a, c, d]]
    elif kind is ElementKind.Q2:
        xs = np.linspace(ox, ox + width, 2 * nx + 1)
        ys = np.linspace(oy, oy + height, 2 * ny + 1)
        gid = lambda i, j: j * (2 * nx + 1) + i
        nodes = np.array([[x, y] for y in ys for x in xs])
        elements = []
        for j in range(ny):
            for i in range(nx):
                i0, j0 = 2 * i, 2 * j
                elements.append([
                    gid(i0, j0), gid(i0 + 2, j0), gid(i0 + 2, j0 + 2), gid(i0, j0 + 2),
                    gid(i0 + 1, j0), gid(i0 + 2, j0 + 1), gid(i0 + 1, j0 + 2), gid(i0, j0 + 1),
                    gid(i0 + 1, j0 + 1),
                ])
    elif kind is ElementKind.P2:
        xs = np.linspace(ox, ox + width, 2 * nx + 1)
        ys = np.linspace(oy, oy + height, 2 * ny + 1)
        gid = lambda i, j: j * (2 * nx + 1) + i
        nodes = np.array([[x, y] for y in ys for x in xs])
        elements = []
        for j in range(ny):
            for i in range(nx):
                i0, j0 = 2 * i, 2 * j
                a, b = gid(i0, j0), gid(i0 + 2, j0)
                c, d = gid(i0 + 2, j0 + 2), gid(i0, j0 + 2)
                ab, bc = gid(i0 + 1, j0), gid(i0 + 2, j0 + 1)
                cd, ad = gid(i0 + 1, j0 + 2), gid(i0, j0 + 1)
                ac = gid(i0 + 1, j0 + 1)
                elements += [[a, b, c, ab, bc, ac], [a, c, d, ac, cd, ad]]
    else:
        raise ValueError(f"unknown element kind {kind!r}")
    return np.asarray(nodes, dtype=float), np.asarray(elements, dtype=np.intp)


def _snap_quadratic_nodes(nodes: np.ndarray, elements: np.ndarray, kind: ElementKind):
    """Move mid-edge (and Q2 center) nodes to straight-sided positions.

    Keeps quadratic elements geometrically affine/bilinear so the mapping
    matches the corner geometry exactly.
    """
    if kind is ElementKind.P2:
        for conn in elements:
            nodes[conn[3]] = 0.5 * (nodes[conn[0]] + nodes[conn[1]])
            nodes[conn[4]] = 0.5 * (nodes[conn[1]] + nodes[conn[2]])
            nodes[conn[5]] = 0.5 * (nodes[conn[2]] + nodes[conn[0]])
    elif kind is ElementKind.Q2:
        for conn in elements:
            nodes[conn[4]] = 0.5 * (nodes[conn[0]] + nodes[conn[1]])
            nodes[conn[5]] = 0.5 * (nodes[conn[1]] + nodes[conn[2]])
            nodes[conn[6]] = 0.5 * (nodes[conn[2]] + nodes[conn[3]])
            nodes[conn[7]] = 0.5 * (nodes[conn[3]] + nodes[conn[0]])
            nodes[conn[8]] = 0.25 * nodes[conn[:4]].sum(axis=0)


# ---------------------------------------------------------------------------
# rigid-body transforms and plain-text IO
# ---------------------------------------------------------------------------

def merge_meshes(a: StructuralMesh, b: StructuralMesh) -> StructuralMesh:
    """Disjoint union of two meshes of the same element kind."""
    if a.kind != b.kind:
        raise MeshQualityError("cannot merge meshes of different element kinds")
    nodes = np.vstack([a.nodes, b.nodes])
    elements = np.vstack([a.elements, b.elements + a.n_nodes])
    facets = list(a.boundary_facets) + [
        BoundaryFacet(f.element + a.n_elements, f.side, f.marker)
        for f in b.boundary_facets
    ]
    return StructuralMesh(a.kind, nodes, elements, facets)


def transform_mesh(mesh: StructuralMesh, rotation: float = 0.0,
                   translation=(0.0, 0.0)) -> StructuralMesh:
    """Rotate (radians, about the origin) then translate a mesh."""
    c, s = np.cos(rotation), np.sin(rotation)
    R = np.array([[c, -s], [s, c]])
    nodes = mesh.nodes @ R.T + np.asarray(translation, dtype=float)
    return StructuralMesh(mesh.kind, nodes, mesh.elements.copy(),
                          list(mesh.boundary_facets))


def write_mesh_text(mesh: StructuralMesh, path):
    """Plain-text format: 'kind n_nodes n_elements', nodes, elements, facets."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.kind.value} {mesh.n_nodes} {mesh.n_elements}\n")
        for x, y in mesh.nodes:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for conn in mesh.elements:
            fh.write(" ".join(str(int(i)) for i in conn) + "\n")
        for f in mesh.boundary_facets:
            fh.write(f"{f.element} {f.side} {f.marker or '-'}\n")


def read_mesh_text(path) -> StructuralMesh:
    with open(path) as fh:
        tokens = fh.readline().split()
        kind = ElementKind(tokens[0])
        n_nodes, n_elements = int(tokens[1]), int(tokens[2])
        nodes = np.array(
            [[float(v) for v in fh.readline().split()] for _ in range(n_nodes)]
        )
        elements = np.array(
            [[int(v) for v in fh.readline().split()] for _ in range(n_elements)],
            dtype=np.intp,
        )
        facets = []
        for line in fh:
            parts = line.split()
            if len(parts) < 2:
                continue
            marker = parts[2] if len(parts) > 2 and parts[2] != "-" else ""
            facets.append(BoundaryFacet(int(parts[0]), int(parts[1]), marker))
    return StructuralMesh(kind, nodes, elements, facets)
