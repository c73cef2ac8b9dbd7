"""Incompressible Navier-Stokes stepping on the MAC grid.

One stage advances the momentum equation with explicit advection (centered
differences with a Peclet-gated upwind blend), backward-Euler viscosity, and
an incremental pressure projection. The Poisson solve uses diagonally
preconditioned conjugate gradients (warm-started; absolute residual
tolerance), the viscous Helmholtz solves use cached sparse LU factors.

Boundary handling: velocity-Dirichlet sides prescribe normal faces directly
and reflect tangential ghosts about the wall value; normal-traction sides
impose a boundary pressure target with zero tangential wall velocity and a
zero-gradient normal velocity extrapolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BlowUpError, SolverError
from .grid import (
    DirichletVelocity,
    MACGrid,
    StaggeredField,
    divergence,
    ghosted_velocity,
)


@dataclass
class SolverStats:
    poisson_iterations: int = 0
    poisson_solves: int = 0

    def reset(self):
        self.poisson_iterations = 0
        self.poisson_solves = 0


class FluidSolver:
    def __init__(self, grid: MACGrid, rho: float, mu: float,
                 upwind_blend: float = 0.2, poisson_tol: float = 1e-10,
                 poisson_method: str = "cg", poisson_maxiter: int = 10000):
        self.grid = grid
        self.rho = float(rho)
        self.mu = float(mu)
        self.upwind_blend = float(upwind_blend)
        self.poisson_tol = float(poisson_tol)
        self.poisson_method = poisson_method
        self.poisson_maxiter = poisson_maxiter
        self.stats = SolverStats()
        self._assemble_poisson()
        self._helmholtz_cache: dict = {}
        self._phi_prev = np.zeros(grid.nx * grid.ny)
        self.all_dirichlet = not any(grid.is_traction(s) for s in
                                     ("left", "right", "bottom", "top"))

    # ------------------------------------------------------------------
    # pressure Poisson operator: A = -div grad with Neumann rows at
    # velocity-Dirichlet sides and ghost-eliminated Dirichlet values at
    # traction sides
    # ------------------------------------------------------------------
    def _assemble_poisson(self):
        g = self.grid
        nx, ny, dx = g.nx, g.ny, g.dx
        n = nx * ny
        inv2 = 1.0 / dx ** 2
        rows, cols, data = [], [], []

        def rc(i, j):
            return i * ny + j

        for i in range(nx):
            for j in range(ny):
                r = rc(i, j)
                diag = 0.0
                for side, ni, nj in (("left", i - 1, j), ("right", i + 1, j),
                                     ("bottom", i, j - 1), ("top", i, j + 1)):
                    if 0 <= ni < nx and 0 <= nj < ny:
                        diag += inv2
                        rows.append(r)
                        cols.append(rc(ni, nj))
                        data.append(-inv2)
                    elif g.is_traction(side):
                        diag += 2.0 * inv2
                    # velocity-Dirichlet side: Neumann, no contribution
                rows.append(r)
                cols.append(r)
                data.append(diag)
        self.poisson = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
        self._poisson_diag = self.poisson.diagonal()
        if not any(self.grid.is_traction(s) for s in ("left", "right", "bottom", "top")):
            # singular (constant nullspace); pinning used by the direct path
            pinned = self.poisson.tolil()
            pinned[0, :] = 0.0
            pinned[0, 0] = 1.0
            self._poisson_pinned = pinned.tocsc()
        else:
            self._poisson_pinned = self.poisson.tocsc()
        self._poisson_factor = None

    def _traction_targets(self, t: float) -> dict[str, np.ndarray]:
        """Boundary pressure targets per traction side, per boundary cell."""
        g = self.grid
        out = {}
        ox, oy = g.origin
        yc = oy + g.dx * (np.arange(g.ny) + 0.5)
        xc = ox + g.dx * (np.arange(g.nx) + 0.5)
        for side in ("left", "right", "bottom", "top"):
            if g.is_traction(side):
                coord = yc if side in ("left", "right") else xc
                out[side] = g.bc[side].sample(coord, t)
        return out

    def solve_pressure(self, rhs: np.ndarray) -> np.ndarray:
        b = rhs.ravel().copy()
        if self.all_dirichlet:
            b -= b.mean()
        if self.poisson_method == "direct":
            if self._poisson_factor is None:
                self._poisson_factor = spla.factorized(self._poisson_pinned)
            if self.all_dirichlet:
                b[0] = 0.0
            x = self._poisson_factor(b)
        else:
            diag = self._poisson_diag
            M = spla.LinearOperator(self.poisson.shape, lambda v: v / diag)
            iters = 0

            def count(_):
                nonlocal iters
                iters += 1

            x0 = self._phi_prev
            x, info = spla.cg(self.poisson, b, x0=x0, rtol=0.0,
                              atol=self.poisson_tol, maxiter=self.poisson_maxiter,
                              M=M, callback=count)
            self.stats.poisson_iterations += iters
            self.stats.poisson_solves += 1
            if info != 0:
                res = float(np.linalg.norm(b - self.poisson @ x))
                raise SolverError("pressure Poisson CG did not converge",
                                  residual=res, iterations=iters)
        if self.all_dirichlet:
            x = x - x.mean()
        self._phi_prev = x.copy()
        return x.reshape(self.grid.nx, self.grid.ny)

    # ------------------------------------------------------------------
    # viscous Helmholtz (I - gamma Lap) per component, cached by gamma
    # ------------------------------------------------------------------
    def _helmholtz(self, comp: str, gamma: float):
        key = (comp, round(gamma, 14))
        if key in self._helmholtz_cache:
            return self._helmholtz_cache[key]
        g = self.grid
        nx, ny, dx = g.nx, g.ny, g.dx
        c = gamma / dx ** 2
        if comp == "u":
            shape = (nx + 1, ny)
            normal_sides = ("left", "right")
            tangential_sides = ("bottom", "top")
        else:
            shape = (nx, ny + 1)
            normal_sides = ("bottom", "top")
            tangential_sides = ("left", "right")
        n = shape[0] * shape[1]

        def rc(i, j):
            return i * shape[1] + j

        rows, cols, data = [], [], []
        identity_rows = []
        # (row, wall_side) pairs needing 2*c*u_wall rhs corrections
        wall_rows = {s: [] for s in tangential_sides}
        for i in range(shape[0]):
            for j in range(shape[1]):
                r = rc(i, j)
                # prescribed normal faces on velocity-Dirichlet sides
                if comp == "u" and i == 0 and not g.is_traction("left") or \
                   comp == "u" and i == shape[0] - 1 and not g.is_traction("right") or \
                   comp == "v" and j == 0 and not g.is_traction("bottom") or \
                   comp == "v" and j == shape[1] - 1 and not g.is_traction("top"):
                    identity_rows.append(r)
                    rows.append(r)
                    cols.append(r)
                    data.append(1.0)
                    continue
                diag = 1.0 + 4.0 * c
                for (ni, nj), side in (((i - 1, j), normal_sides[0] if comp == "u" else tangential_sides[0]),
                                       ((i + 1, j), normal_sides[1] if comp == "u" else tangential_sides[1]),
                                       ((i, j - 1), tangential_sides[0] if comp == "u" else normal_sides[0]),
                                       ((i, j + 1), tangential_sides[1] if comp == "u" else normal_sides[1])):
                    if 0 <= ni < shape[0] and 0 <= nj < shape[1]:
                        rows.append(r)
                        cols.append(rc(ni, nj))
                        data.append(-c)
                        continue
                    normal_dir = (comp == "u" and side in ("left", "right")) or \
                                 (comp == "v" and side in ("bottom", "top"))
                    if normal_dir:
                        # zero-gradient ghost at a traction side
                        diag -= c
                    else:
                        # tangential wall: ghost = 2 u_wall - u_P
                        diag += c
                        wall_rows[side].append((r, i if comp == "u" else j))
                rows.append(r)
                cols.append(r)
                data.append(diag)
        A = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsc()
        entry = {
            "factor": spla.factorized(A),
            "identity_rows": np.array(identity_rows, dtype=np.intp),
            "wall_rows": {s: np.array(v, dtype=np.intp).reshape(-1, 2)
                          for s, v in wall_rows.items()},
            "shape": shape,
            "c": c,
        }
        self._helmholtz_cache[key] = entry
        return entry

    def _dirichlet_face_values(self, comp: str, side: str, t: float) -> np.ndarray:
        g = self.grid
        ox, oy = g.origin
        bc = g.bc[side]
        if comp == "u":
            y = oy + g.dx * (np.arange(g.ny) + 0.5)
            x = np.full(g.ny, ox if side == "left" else ox + g.nx * g.dx)
            return bc.sample(x, y, t)[0]
        x = ox + g.dx * (np.arange(g.nx) + 0.5)
        y = np.full(g.nx, oy if side == "bottom" else oy + g.ny * g.dx)
        return bc.sample(x, y, t)[1]

    def _wall_tangential(self, comp: str, side: str, t: float) -> np.ndarray:
        """Tangential wall velocity along a side, sampled at face stations."""
        g = self.grid
        ox, oy = g.origin
        bc = g.bc[side]
        if isinstance(bc, DirichletVelocity):
            if comp == "u":   # side is bottom/top; u faces at x = i dx
                x = ox + g.dx * np.arange(g.nx + 1)
                y = np.full(g.nx + 1, oy if side == "bottom" else oy + g.ny * g.dx)
                return bc.sample(x, y, t)[0]
            y = oy + g.dx * np.arange(g.ny + 1)
            x = np.full(g.ny + 1, ox if side == "left" else ox + g.nx * g.dx)
            return bc.sample(x, y, t)[1]
        size = g.nx + 1 if comp == "u" else g.ny + 1
        return np.zeros(size)   # traction sides: zero tangential velocity

    def apply_dirichlet(self, vel: StaggeredField, t: float) -> None:
        g = self.grid
        if not g.is_traction("left"):
            vel.u[0, :] = self._dirichlet_face_values("u", "left", t)
        if not g.is_traction("right"):
            vel.u[-1, :] = self._dirichlet_face_values("u", "right", t)
        if not g.is_traction("bottom"):
            vel.v[:, 0] = self._dirichlet_face_values("v", "bottom", t)
        if not g.is_traction("top"):
            vel.v[:, -1] = self._dirichlet_face_values("v", "top", t)

    # ------------------------------------------------------------------
    # advection
    # ------------------------------------------------------------------
    def advection(self, vel: StaggeredField, adv: StaggeredField, t: float
                  ) -> tuple[np.ndarray, np.ndarray]:
        """(adv . grad) vel on u and v faces, centered with upwind blend."""
        dx = self.grid.dx
        U, V = ghosted_velocity(vel, t, ng=1)
        Ua, Va = (U, V) if adv is vel else ghosted_velocity(adv, t, ng=1)
        nu = self.mu / self.rho

        # u faces -------------------------------------------------------
        P = U[1:-1, 1:-1]
        uE, uW = U[2:, 1:-1], U[:-2, 1:-1]
        uN, uS = U[1:-1, 2:], U[1:-1, :-2]
        ua = Ua[1:-1, 1:-1]
        va = 0.25 * (Va[:-1, 1:-1][:, :-1] + Va[:-1, 1:-1][:, 1:]
                     + Va[1:, 1:-1][:, :-1] + Va[1:, 1:-1][:, 1:])
        dudx_c = (uE - uW) / (2 * dx)
        dudy_c = (uN - uS) / (2 * dx)
        dudx_up = np.where(ua > 0, (P - uW) / dx, (uE - P) / dx)
        dudy_up = np.where(va > 0, (P - uS) / dx, (uN - P) / dx)
        bx = self._blend(np.abs(ua), nu, dx)
        by = self._blend(np.abs(va), nu, dx)
        Nu = ua * ((1 - bx) * dudx_c + bx * dudx_up) \
            + va * ((1 - by) * dudy_c + by * dudy_up)

        # v faces -------------------------------------------------------
        Pv = V[1:-1, 1:-1]
        vE, vW = V[2:, 1:-1], V[:-2, 1:-1]
        vN, vS = V[1:-1, 2:], V[1:-1, :-2]
        va2 = Va[1:-1, 1:-1]
        ua2 = 0.25 * (Ua[1:-1, :-1][:-1, :] + Ua[1:-1, :-1][1:, :]
                      + Ua[1:-1, 1:][:-1, :] + Ua[1:-1, 1:][1:, :])
        dvdx_c = (vE - vW) / (2 * dx)
        dvdy_c = (vN - vS) / (2 * dx)
        dvdx_up = np.where(ua2 > 0, (Pv - vW) / dx, (vE - Pv) / dx)
        dvdy_up = np.where(va2 > 0, (Pv - vS) / dx, (vN - Pv) / dx)
        bx = self._blend(np.abs(ua2), nu, dx)
        by = self._blend(np.abs(va2), nu, dx)
        Nv = ua2 * ((1 - bx) * dvdx_c + bx * dvdx_up) \
            + va2 * ((1 - by) * dvdy_c + by * dvdy_up)
        return Nu, Nv

    def _blend(self, speed, nu, dx):
        if self.upwind_blend == 0.0:
            return 0.0
        pe = speed * dx / max(nu, 1e-300)
        return self.upwind_blend * np.clip(1.0 - 2.0 / np.maximum(pe, 1e-12), 0.0, 1.0)

    # ------------------------------------------------------------------
    # pressure gradients (traction sides use ghost-extrapolated values)
    # ------------------------------------------------------------------
    def pressure_gradient(self, p: np.ndarray, targets: dict
                          ) -> tuple[np.ndarray, np.ndarray]:
        g = self.grid
        dx = g.dx
        gu = np.zeros((g.nx + 1, g.ny))
        gv = np.zeros((g.nx, g.ny + 1))
        gu[1:-1, :] = (p[1:, :] - p[:-1, :]) / dx
        gv[:, 1:-1] = (p[:, 1:] - p[:, :-1]) / dx
        if "left" in targets:
            gu[0, :] = 2.0 * (p[0, :] - targets["left"]) / dx
        if "right" in targets:
            gu[-1, :] = 2.0 * (targets["right"] - p[-1, :]) / dx
        if "bottom" in targets:
            gv[:, 0] = 2.0 * (p[:, 0] - targets["bottom"]) / dx
        if "top" in targets:
            gv[:, -1] = 2.0 * (targets["top"] - p[:, -1]) / dx
        return gu, gv

    # ------------------------------------------------------------------
    # one projection stage of length tau
    # ------------------------------------------------------------------
    def advance(self, vel: StaggeredField, p: np.ndarray, forces: StaggeredField,
                tau: float, t_old: float, adv: StaggeredField | None = None
                ) -> tuple[StaggeredField, np.ndarray]:
        g = self.grid
        rho, dx = self.rho, g.dx
        t_new = t_old + tau
        adv = adv if adv is not None else vel
        if not (np.isfinite(vel.u).all() and np.isfinite(vel.v).all()):
            raise BlowUpError(-1, "fluid state")

        Nu, Nv = self.advection(vel, adv, t_old)
        gp_old = self.pressure_gradient(p, self._traction_targets(t_old))

        rhs_u = vel.u + tau * (-Nu + (forces.u - gp_old[0]) / rho)
        rhs_v = vel.v + tau * (-Nv + (forces.v - gp_old[1]) / rho)

        gamma = tau * self.mu / rho
        star = StaggeredField(g, self._viscous_solve("u", gamma, rhs_u, t_new),
                              self._viscous_solve("v", gamma, rhs_v, t_new))
        self.apply_dirichlet(star, t_new)

        # projection: p_new = p_old + phi
        targets_new = self._traction_targets(t_new)
        phi_b = {s: targets_new[s] - self._boundary_cell_pressure(p, s)
                 for s in targets_new}
        rhs = -(rho / tau) * divergence(star)
        inv2 = 1.0 / dx ** 2
        if "left" in phi_b:
            rhs[0, :] += 2.0 * inv2 * phi_b["left"]
        if "right" in phi_b:
            rhs[-1, :] += 2.0 * inv2 * phi_b["right"]
        if "bottom" in phi_b:
            rhs[:, 0] += 2.0 * inv2 * phi_b["bottom"]
        if "top" in phi_b:
            rhs[:, -1] += 2.0 * inv2 * phi_b["top"]
        phi = self.solve_pressure(rhs)

        gphi = self.pressure_gradient(phi, phi_b)
        unew = star.u - (tau / rho) * gphi[0]
        vnew = star.v - (tau / rho) * gphi[1]
        out = StaggeredField(g, unew, vnew)
        self.apply_dirichlet(out, t_new)
        p_new = p + phi
        if self.all_dirichlet:
            p_new = p_new - p_new.mean()
        if not (np.isfinite(out.u).all() and np.isfinite(out.v).all()
                and np.isfinite(p_new).all()):
            raise BlowUpError(-1, "fluid state")
        return out, p_new

    def _boundary_cell_pressure(self, p: np.ndarray, side: str) -> np.ndarray:
        return {"left": p[0, :], "right": p[-1, :],
                "bottom": p[:, 0], "top": p[:, -1]}[side]

    def project(self, vel: StaggeredField) -> tuple[StaggeredField, np.ndarray]:
        """Make the field discretely divergence-free (homogeneous targets)."""
        zero_targets = {s: np.zeros(self.grid.ny if s in ("left", "right")
                                    else self.grid.nx)
                        for s in ("left", "right", "bottom", "top")
                        if self.grid.is_traction(s)}
        phi = self.solve_pressure(-divergence(vel))
        gphi = self.pressure_gradient(phi, zero_targets)
        out = StaggeredField(self.grid, vel.u - gphi[0], vel.v - gphi[1])
        return out, phi

    def _viscous_solve(self, comp: str, gamma: float, rhs: np.ndarray,
                       t_new: float) -> np.ndarray:
        entry = self._helmholtz(comp, gamma)
        shape, c = entry["shape"], entry["c"]
        b = rhs.ravel().copy()
        # rhs corrections from tangential wall ghosts: 2 c u_wall
        for side, pairs in entry["wall_rows"].items():
            if pairs.size == 0:
                continue
            wall = self._wall_tangential(comp, side, t_new)
            b[pairs[:, 0]] += 2.0 * c * wall[pairs[:, 1]]
        # prescribed normal faces
        ids = entry["identity_rows"]
        if ids.size:
            g = self.grid
            if comp == "u":
                vals = np.zeros(shape)
                if not g.is_traction("left"):
                    vals[0, :] = self._dirichlet_face_values("u", "left", t_new)
                if not g.is_traction("right"):
                    vals[-1, :] = self._dirichlet_face_values("u", "right", t_new)
            else:
                vals = np.zeros(shape)
                if not g.is_traction("bottom"):
                    vals[:, 0] = self._dirichlet_face_values("v", "bottom", t_new)
                if not g.is_traction("top"):
                    vals[:, -1] = self._dirichlet_face_values("v", "top", t_new)
            b[ids] = vals.ravel()[ids]
        return entry["factor"](b).reshape(shape)

    # ------------------------------------------------------------------
    # full step: explicit midpoint (RK2) in the advective/force terms
    # ------------------------------------------------------------------
    def step(self, vel: StaggeredField, p: np.ndarray, forces: StaggeredField,
             dt: float, t: float) -> tuple[StaggeredField, np.ndarray]:
        half, p_half = self.advance(vel, p, forces, 0.5 * dt, t)
        return self.advance(vel, p, forces, dt, t, adv=half)
