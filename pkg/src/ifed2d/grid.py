"""Uniform 2D marker-and-cell staggered grid.

Velocity components live at face midpoints (u on x-normal faces, v on
y-normal faces), pressure at cell barycenters. Cells are square with a
single spacing dx. Boundary conditions are per-side: prescribed velocity
(Dirichlet) or prescribed normal traction with zero tangential velocity;
the traction value h is the boundary pressure target (sigma_nn ~ -h with
the viscous normal stress neglected, so h > 0 pushes fluid inward).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SIDES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class DirichletVelocity:
    """Velocity profile on a side: callable (x, y, t) -> (u, v) or constants."""

    profile: Callable | tuple[float, float] = (0.0, 0.0)

    def sample(self, x, y, t):
        if callable(self.profile):
            u, v = self.profile(x, y, t)
        else:
            u, v = self.profile
        return (np.broadcast_to(u, np.shape(x)).astype(float),
                np.broadcast_to(v, np.shape(x)).astype(float))


@dataclass(frozen=True)
class NormalTraction:
    """Boundary pressure target with zero tangential velocity."""

    pressure: float | Callable = 0.0

    def sample(self, coord, t):
        if callable(self.pressure):
            return np.asarray(self.pressure(coord, t), dtype=float)
        return np.full(np.shape(coord), float(self.pressure))


@dataclass
class MACGrid:
    nx: int
    ny: int
    dx: float
    origin: tuple[float, float] = (0.0, 0.0)
    bc: dict = field(default_factory=lambda: {s: DirichletVelocity() for s in SIDES})

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or self.dx <= 0:
            raise ValueError("grid needs nx, ny >= 1 and dx > 0")
        for s in SIDES:
            self.bc.setdefault(s, DirichletVelocity())

    @property
    def extent(self) -> tuple[float, float]:
        return self.nx * self.dx, self.ny * self.dx

    # face/cell coordinate arrays -----------------------------------------
    def u_face_coords(self) -> tuple[np.ndarray, np.ndarray]:
        ox, oy = self.origin
        x = ox + self.dx * np.arange(self.nx + 1)
        y = oy + self.dx * (np.arange(self.ny) + 0.5)
        return np.meshgrid(x, y, indexing="ij")

    def v_face_coords(self) -> tuple[np.ndarray, np.ndarray]:
        ox, oy = self.origin
        x = ox + self.dx * (np.arange(self.nx) + 0.5)
        y = oy + self.dx * np.arange(self.ny + 1)
        return np.meshgrid(x, y, indexing="ij")

    def cell_coords(self) -> tuple[np.ndarray, np.ndarray]:
        ox, oy = self.origin
        x = ox + self.dx * (np.arange(self.nx) + 0.5)
        y = oy + self.dx * (np.arange(self.ny) + 0.5)
        return np.meshgrid(x, y, indexing="ij")

    def is_traction(self, side: str) -> bool:
        return isinstance(self.bc[side], NormalTraction)


@dataclass
class StaggeredField:
    """u on x-faces (nx+1, ny); v on y-faces (nx, ny+1)."""

    grid: MACGrid
    u: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, grid: MACGrid) -> "StaggeredField":
        return cls(grid, np.zeros((grid.nx + 1, grid.ny)),
                   np.zeros((grid.nx, grid.ny + 1)))

    def copy(self) -> "StaggeredField":
        return StaggeredField(self.grid, self.u.copy(), self.v.copy())

    def __post_init__(self):
        assert self.u.shape == (self.grid.nx + 1, self.grid.ny)
        assert self.v.shape == (self.grid.nx, self.grid.ny + 1)


def divergence(f: StaggeredField) -> np.ndarray:
    """Per-cell MAC divergence, shape (nx, ny)."""
    dx = f.grid.dx
    return (f.u[1:, :] - f.u[:-1, :]) / dx + (f.v[:, 1:] - f.v[:, :-1]) / dx


def mac_gradient(grid: MACGrid, p: np.ndarray) -> StaggeredField:
    """Cell-to-face gradient; zero on boundary faces (homogeneous setting)."""
    g = StaggeredField.zeros(grid)
    g.u[1:-1, :] = (p[1:, :] - p[:-1, :]) / grid.dx
    g.v[:, 1:-1] = (p[:, 1:] - p[:, :-1]) / grid.dx
    return g


def kinetic_energy(f: StaggeredField, rho: float) -> float:
    """0.5 rho integral |u|^2 via face sums (each face carries dx^2)."""
    dx2 = f.grid.dx ** 2
    return 0.5 * rho * dx2 * (np.sum(f.u ** 2) + np.sum(f.v ** 2))


# ---------------------------------------------------------------------------
# ghost filling
# ---------------------------------------------------------------------------

def ghosted_velocity(f: StaggeredField, t: float, ng: int = 2
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Velocity arrays padded with ng ghost layers filled per the side BCs.

    Dirichlet sides reflect tangential components about the wall value and
    extrapolate normal components linearly; traction sides use zero-gradient
    normal and zero tangential wall velocity.
    """
    grid = f.grid
    nx, ny, dx = grid.nx, grid.ny, grid.dx
    ox, oy = grid.origin
    U = np.zeros((nx + 1 + 2 * ng, ny + 2 * ng))
    V = np.zeros((nx + 2 * ng, ny + 1 + 2 * ng))
    U[ng:ng + nx + 1, ng:ng + ny] = f.u
    V[ng:ng + nx, ng:ng + ny + 1] = f.v

    def wall_values(side, coords_x, coords_y):
        bc = grid.bc[side]
        if isinstance(bc, DirichletVelocity):
            return bc.sample(coords_x, coords_y, t)
        return (np.zeros(np.shape(coords_x)), np.zeros(np.shape(coords_x)))

    yu = oy + dx * (np.arange(ny) + 0.5)            # u-face y coordinates
    xv = ox + dx * (np.arange(nx) + 0.5)            # v-face x coordinates
    xu = ox + dx * np.arange(nx + 1)
    yv = oy + dx * np.arange(ny + 1)

    # left side
    if grid.is_traction("left"):
        for k in range(1, ng + 1):
            U[ng - k, ng:ng + ny] = U[ng, ng:ng + ny]
            V[ng - k, ng:ng + ny + 1] = -V[ng + k - 1, ng:ng + ny + 1]
    else:
        uw, vw = wall_values("left", np.full(ny, ox), yu)
        _, vwall = wall_values("left", np.full(ny + 1, ox), yv)
        for k in range(1, ng + 1):
            U[ng - k, ng:ng + ny] = 2 * uw - U[ng + k, ng:ng + ny]
            V[ng - k, ng:ng + ny + 1] = 2 * vwall - V[ng + k - 1, ng:ng + ny + 1]
    # right side
    if grid.is_traction("right"):
        for k in range(1, ng + 1):
            U[ng + nx + k, ng:ng + ny] = U[ng + nx, ng:ng + ny]
            V[ng + nx - 1 + k, ng:ng + ny + 1] = -V[ng + nx - k, ng:ng + ny + 1]
    else:
        uw, _ = wall_values("right", np.full(ny, ox + nx * dx), yu)
        _, vwall = wall_values("right", np.full(ny + 1, ox + nx * dx), yv)
        for k in range(1, ng + 1):
            U[ng + nx + k, ng:ng + ny] = 2 * uw - U[ng + nx - k, ng:ng + ny]
            V[ng + nx - 1 + k, ng:ng + ny + 1] = 2 * vwall - V[ng + nx - k, ng:ng + ny + 1]
    # bottom side
    if grid.is_traction("bottom"):
        for k in range(1, ng + 1):
            V[:, ng - k] = V[:, ng]
            U[:, ng - k] = -U[:, ng + k - 1]
    else:
        _, vw = wall_values("bottom", xv, np.full(nx, oy))
        uwall, _ = wall_values("bottom", xu, np.full(nx + 1, oy))
        for k in range(1, ng + 1):
            V[ng:ng + nx, ng - k] = 2 * vw - V[ng:ng + nx, ng + k]
            U[ng:ng + nx + 1, ng - k] = 2 * uwall - U[ng:ng + nx + 1, ng + k - 1]
    # top side
    if grid.is_traction("top"):
        for k in range(1, ng + 1):
            V[:, ng + ny + k] = V[:, ng + ny]
            U[:, ng + ny - 1 + k] = -U[:, ng + ny - k]
    else:
        _, vw = wall_values("top", xv, np.full(nx, oy + ny * dx))
        uwall, _ = wall_values("top", xu, np.full(nx + 1, oy + ny * dx))
        for k in range(1, ng + 1):
            V[ng:ng + nx, ng + ny + k] = 2 * vw - V[ng:ng + nx, ng + ny - k]
            U[ng:ng + nx + 1, ng + ny - 1 + k] = 2 * uwall - U[ng:ng + nx + 1, ng + ny - k]
    return U, V


# ---------------------------------------------------------------------------
# snapshot output (text and little-endian binary)
# ---------------------------------------------------------------------------

_MAGIC = b"IFEDSNAP"


def write_snapshot(path, f: StaggeredField, p: np.ndarray, time: float,
                   binary: bool = True) -> None:
    """Grid snapshot: header (nx, ny, dx, origin, time) + row-major arrays.

    Binary layout (little-endian): 8-byte magic, then int64 nx, ny, then
    float64 dx, ox, oy, time, then u, v, p arrays in C order.
    """
    grid = f.grid
    if binary:
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            np.array([grid.nx, grid.ny], dtype="<i8").tofile(fh)
            np.array([grid.dx, grid.origin[0], grid.origin[1], time],
                     dtype="<f8").tofile(fh)
            for arr in (f.u, f.v, p):
                np.ascontiguousarray(arr, dtype="<f8").tofile(fh)
        return
    with open(path, "w") as fh:
        fh.write(f"ifed-snapshot {grid.nx} {grid.ny} {grid.dx!r} "
                 f"{grid.origin[0]!r} {grid.origin[1]!r} {time!r}\n")
        for name, arr in (("u", f.u), ("v", f.v), ("p", p)):
            fh.write(f"{name}\n")
            for row in arr:
                fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def read_snapshot(path) -> tuple[MACGrid, StaggeredField, np.ndarray, float]:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError("not a binary snapshot file")
        nx, ny = np.fromfile(fh, dtype="<i8", count=2)
        dx, ox, oy, time = np.fromfile(fh, dtype="<f8", count=4)
        grid = MACGrid(int(nx), int(ny), float(dx), (float(ox), float(oy)))
        u = np.fromfile(fh, dtype="<f8", count=(nx + 1) * ny).reshape(nx + 1, ny)
        v = np.fromfile(fh, dtype="<f8", count=nx * (ny + 1)).reshape(nx, ny + 1)
        p = np.fromfile(fh, dtype="<f8", count=nx * ny).reshape(nx, ny)
    return grid, StaggeredField(grid, u, v), p, float(time)
