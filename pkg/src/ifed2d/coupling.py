"""Eulerian-Lagrangian coupling: force spreading, velocity interpolation,
and velocity projection for both coupling schemes.

Nodal scheme (node interaction points): the spread quantity is the raw load
vector entry ("mean force contribution"), with no quadrature or mass
weights; the lumped-diagonal division and multiplication cancel exactly, so
the result is independent of the diagonal by construction. Velocity
projection reduces to sampling the interpolated velocity at the nodes.

Elemental scheme (adaptive-quadrature interaction points): forces are
consistently projected, evaluated at the rule's points and spread with the
rule's weights; velocities are interpolated at the same points and
L2-projected back with a consistent mass solve.

Spreading writes into arrays padded by `ng` ghost faces per side; ghost
contributions are dropped when cropping to the grid (momentum absorbed at
walls) but retained in the conservation diagnostics, which are exact sums
over the padded arrays. A kernel support reaching past the padded region is
a hard out-of-domain error naming the offending point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomainError
from .fields import FEField
from .grid import MACGrid, StaggeredField, ghosted_velocity
from .kernels import Kernel, stencil
from .mechanics import MassOperator, quad_basis
from .quadrature import MeshQuadrature

DEFAULT_GHOST = 2


@dataclass(frozen=True)
class CouplingConfig:
    scheme: str                      # "nodal" | "elemental"
    kernel: Kernel
    c_a: float = 0.5                 # adaptive spacing constant (elemental)
    ghost: int = DEFAULT_GHOST

    def __post_init__(self):
        if self.scheme not in ("nodal", "elemental"):
            raise ValueError(f"unknown coupling scheme {self.scheme!r}")


def mesh_factor(dX: float, element_degree: int, dx: float) -> float:
    """M_FAC = DX / (E_FAC dx); E_FAC = 1 linear, 2 quadratic."""
    e_fac = 1 if element_degree == 1 else 2
    return dX / (e_fac * dx)


# ---------------------------------------------------------------------------
# point-set primitives
# ---------------------------------------------------------------------------

def _face_stencils(grid: MACGrid, kernel: Kernel, positions: np.ndarray,
                   comp: str, ng: int):
    """Window indices/weights of each point against one face lattice.

    Returns (i0p, wx, j0p, wy) in padded indexing; raises OutOfDomainError
    when a window leaves the padded arrays.
    """
    ox, oy = grid.origin
    dx = grid.dx
    if comp == "u":
        tx = (positions[:, 0] - ox) / dx
        ty = (positions[:, 1] - oy) / dx - 0.5
        shape = (grid.nx + 1 + 2 * ng, grid.ny + 2 * ng)
    else:
        tx = (positions[:, 0] - ox) / dx - 0.5
        ty = (positions[:, 1] - oy) / dx
        shape = (grid.nx + 2 * ng, grid.ny + 1 + 2 * ng)
    i0, wx = stencil(kernel, tx)
    j0, wy = stencil(kernel, ty)
    i0p, j0p = i0 + ng, j0 + ng
    s = kernel.stencil_width
    bad = (i0p < 0) | (j0p < 0) | (i0p + s > shape[0]) | (j0p + s > shape[1])
    if bad.any():
        q = int(np.argmax(bad))
        raise OutOfDomainError(positions[q],
                               f"kernel support of point ({positions[q, 0]:.6g}, "
                               f"{positions[q, 1]:.6g}) leaves the grid "
                               f"(+{ng}-cell margin)")
    return i0p, wx, j0p, wy


@dataclass
class SpreadResult:
    """Padded spread force arrays plus the crop to grid faces."""

    grid: MACGrid
    u_pad: np.ndarray
    v_pad: np.ndarray
    ng: int

    @property
    def field(self) -> StaggeredField:
        ng, g = self.ng, self.grid
        return StaggeredField(g, self.u_pad[ng:ng + g.nx + 1, ng:ng + g.ny].copy(),
                              self.v_pad[ng:ng + g.nx, ng:ng + g.ny + 1].copy())

    def moments(self) -> tuple[np.ndarray, float]:
        """(total force (2,), scalar first moment) over the padded arrays.

        total_d = dx^2 sum f_d; first = dx^2 sum (f1 x1 + f2 x2) with face
        coordinates of each component's own lattice.
        """
        g, ng = self.grid, self.ng
        dx2 = g.dx ** 2
        ox, oy = g.origin
        xs_u = ox + g.dx * (np.arange(self.u_pad.shape[0]) - ng)
        ys_v = oy + g.dx * (np.arange(self.v_pad.shape[1]) - ng)
        total = np.array([self.u_pad.sum() * dx2, self.v_pad.sum() * dx2])
        first = dx2 * (np.sum(self.u_pad * xs_u[:, None])
                       + np.sum(self.v_pad * ys_v[None, :]))
        return total, first


def spread_points(values: np.ndarray, positions: np.ndarray,
                  weights: np.ndarray | None, grid: MACGrid, kernel: Kernel,
                  ng: int = DEFAULT_GHOST) -> SpreadResult:
    """Spread per-point vector values onto the staggered force lattice.

    f_face += value * delta_h(x_face - position) * weight; pass weights=None
    to spread unweighted (the nodal scheme's mean force contributions).
    """
    w = np.ones(len(positions)) if weights is None else np.asarray(weights, dtype=float)
    scale = w / grid.dx ** 2
    u_pad = np.zeros((grid.nx + 1 + 2 * ng, grid.ny + 2 * ng))
    v_pad = np.zeros((grid.nx + 2 * ng, grid.ny + 1 + 2 * ng))
    s = kernel.stencil_width
    offs = np.arange(s)
    for comp, pad in (("u", u_pad), ("v", v_pad)):
        i0, wx, j0, wy = _face_stencils(grid, kernel, positions, comp, ng)
        col = values[:, 0] if comp == "u" else values[:, 1]
        data = (col * scale)[:, None, None] * wx[:, :, None] * wy[:, None, :]
        rows = (i0[:, None, None] + offs[None, :, None]).repeat(s, axis=2)
        cols = (j0[:, None, None] + offs[None, None, :]).repeat(s, axis=1)
        np.add.at(pad, (rows.ravel(), cols.ravel()), data.ravel())
    return SpreadResult(grid, u_pad, v_pad, ng)


def interpolate_points(vel: StaggeredField, positions: np.ndarray,
                       kernel: Kernel, t: float = 0.0,
                       ng: int = DEFAULT_GHOST) -> np.ndarray:
    """U^IB at each position: sum_faces u delta_h(x_face - X) dx^2."""
    grid = vel.grid
    U, V = ghosted_velocity(vel, t, ng)
    out = np.empty((len(positions), 2))
    s = kernel.stencil_width
    offs = np.arange(s)
    for k, (comp, pad) in enumerate((("u", U), ("v", V))):
        i0, wx, j0, wy = _face_stencils(grid, kernel, positions, comp, ng)
        rows = (i0[:, None, None] + offs[None, :, None]).repeat(s, axis=2)
        cols = (j0[:, None, None] + offs[None, None, :]).repeat(s, axis=1)
        vals = pad[rows, cols]
        out[:, k] = np.einsum("qab,qa,qb->q", vals, wx, wy)
    return out


# ---------------------------------------------------------------------------
# scheme-level operations
# ---------------------------------------------------------------------------

def spread_force_nodal(load: np.ndarray, chi: FEField, grid: MACGrid,
                       kernel: Kernel, ng: int = DEFAULT_GHOST) -> SpreadResult:
    """Nodal force spreading: spread the raw load entries at deformed nodes.

    Implements the weight cancellation literally, so the output is
    independent of any lumped diagonal to machine precision.
    """
    return spread_points(load, chi.values, None, grid, kernel, ng)


def spread_force_weighted(force: FEField, chi: FEField, diag: np.ndarray,
                          grid: MACGrid, kernel: Kernel,
                          ng: int = DEFAULT_GHOST) -> SpreadResult:
    """Nodal spreading in its D-weighted form: spread F_q with weight D_qq.

    Equivalent to spread_force_nodal when F = L / D; exposed separately so
    the diagonal-invariance property can be exercised end to end.
    """
    return spread_points(force.values, chi.values, diag, grid, kernel, ng)


def spread_force_elemental(force: FEField, chi: FEField, aq: MeshQuadrature,
                           grid: MACGrid, kernel: Kernel,
                           ng: int = DEFAULT_GHOST) -> SpreadResult:
    """Elemental spreading: F_h at the rule's points, weighted by w_q."""
    values = force.evaluate(aq)
    positions = chi.evaluate(aq)
    return spread_points(values, positions, aq.weights, grid, kernel, ng)


def interpolate_velocity(vel: StaggeredField, chi: FEField,
                         quad: MeshQuadrature, kernel: Kernel, t: float = 0.0,
                         ng: int = DEFAULT_GHOST) -> np.ndarray:
    """U^IB at the rule's points, kernels centered at deformed positions."""
    return interpolate_points(vel, chi.evaluate(quad), kernel, t, ng)


def project_velocity(u_ib: np.ndarray, quad: MeshQuadrature,
                     mass: MassOperator, tol: float = 1e-10,
                     method: str = "cg") -> FEField:
    """FE velocity coefficients from sampled velocities.

    Nodal rules with a lumped mass: the projection is exactly nodal
    sampling (the diagonal cancels), returned bitwise as sampled. Other
    pairings assemble the L2 right-hand side and solve.
    """
    mesh = quad.mesh
    if quad.node_ids is not None and mass.kind == "lumped":
        values = np.empty((mesh.n_nodes, 2))
        values[quad.node_ids] = u_ib
        return FEField(mesh, values, "velocity")
    vals, _ = quad_basis(quad)
    rhs = np.zeros((mesh.n_nodes, 2))
    contrib = np.einsum("qd,qi,q->qid", u_ib, vals, quad.weights)
    np.add.at(rhs, mesh.elements[quad.element_ids], contrib)
    return FEField(mesh, mass.solve(rhs, tol=tol, method=method), "velocity")
