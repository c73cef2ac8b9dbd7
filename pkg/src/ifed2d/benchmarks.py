"""Benchmark definitions: slanted channel flow, pressure-loaded elastic
band, compressed block, and Cook's membrane, plus error-norm computation.

Structural resolution is specified through the mesh factor
mfac = (node spacing) / dx for linear elements and twice the cell size for
quadratic elements (nodes sit at half-cells), so interaction-point spacing
equals mfac * dx in both cases. The Cartesian grid sizes of the
quasi-static benchmarks follow the ceil formulas tied to the element count
per edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import CouplingConfig
from .elements import ElementKind
from .fields import FEField
from .grid import DirichletVelocity, MACGrid, NormalTraction, StaggeredField
from .kernels import KERNELS, Kernel
from .materials import IncompressibleNeoHookean, ModifiedNeoHookean, RigidPenalty
from .mesh import StructuralMesh, generate_block_mesh, generate_cook_mesh, merge_meshes
from .reporting import BenchmarkRow
from .stepper import (
    BodyTether,
    SimulationConfig,
    StructureSpec,
    SurfaceLoad,
    SurfaceTether,
    run,
)

E_FAC = {1: 1, 2: 2}


def element_factor(kind: ElementKind) -> int:
    return E_FAC[kind.degree]


def _finalize_row(row: BenchmarkRow, sim) -> BenchmarkRow:
    t = sim.timers
    row.time_assembly = t.assembly
    row.time_projection = t.projection
    row.time_spreading = t.spreading
    row.time_interpolation = t.interpolation
    row.time_fluid = t.fluid
    row.structure_solve_iterations = t.structure_solve_iterations
    return row


# ---------------------------------------------------------------------------
# slanted channel flow
# ---------------------------------------------------------------------------

@dataclass
class ChannelFlowSetup:
    length: float = 6.0
    plate_gap: float = 1.0          # D
    wall_thickness: float = 0.24
    theta: float = math.pi / 18
    p0: float = 0.2
    rho: float = 1.0
    mu: float = 0.01

    @property
    def chi_grad(self) -> float:
        th = self.theta
        return 2 * self.p0 / (self.length / math.cos(th)
                              + self.plate_gap * math.tan(th))

    @property
    def y0(self) -> float:
        # channel centerline through the domain center
        c = 0.5 * self.length
        th = self.theta
        return c - (0.5 * self.plate_gap + c * math.sin(th)) / math.cos(th)

    @property
    def peak_speed(self) -> float:
        return self.chi_grad * self.plate_gap ** 2 / (8 * self.mu)

    def eta(self, x, y):
        return -x * math.sin(self.theta) + (y - self.y0) * math.cos(self.theta)

    def exact_velocity(self, x, y):
        eta = self.eta(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        D = self.plate_gap
        speed = self.chi_grad * D / (2 * self.mu) * eta * (1 - eta / D)
        speed = np.where((eta > 0) & (eta < D), speed, 0.0)
        return speed * math.cos(self.theta), speed * math.sin(self.theta)


def _plate_mesh(setup: ChannelFlowSetup, eta_lo: float, eta_hi: float,
                h_cell: float, inset: float = 0.0) -> StructuralMesh:
    """Rigid plate as a rotated P1 block spanning the domain diagonally.

    `inset` shortens the plate at both ends so transient plate motion keeps
    all nodes inside the coupling margin.
    """
    th, L = setup.theta, setup.length
    s_min = (eta_hi * math.sin(th)) / math.cos(th) + inset
    s_max = (L + eta_lo * math.sin(th)) / math.cos(th) - inset
    s_len, width = s_max - s_min, eta_hi - eta_lo
    ns = max(1, round(s_len / h_cell))
    nw = max(1, round(width / h_cell))
    block = generate_block_mesh(s_len, width, ns, nw, ElementKind.P1)
    s = block.nodes[:, 0] + s_min
    eta = block.nodes[:, 1] + eta_lo
    x = s * math.cos(th) - eta * math.sin(th)
    y = setup.y0 + s * math.sin(th) + eta * math.cos(th)
    return StructuralMesh(ElementKind.P1, np.column_stack([x, y]),
                          block.elements.copy(), list(block.boundary_facets))


def channel_flow_config(scheme: str, mfac: float, n: int,
                        kernel: Kernel = KERNELS["bspline3"],
                        t_final: float = 6.0, cfl: float = 0.2,
                        kappa_b_coeff: float = 8.0, eta_b_coeff: float = 0.5,
                        poisson_method: str = "direct"
                        ) -> tuple[SimulationConfig, ChannelFlowSetup, BenchmarkRow]:
    setup = ChannelFlowSetup()
    dx = setup.length / n
    dt = cfl * dx / setup.peak_speed
    h_cell = mfac * dx            # P1: node spacing = cell size
    D, w = setup.plate_gap, setup.wall_thickness
    # plates span the full domain diagonally (any tip gap opens a bypass
    # around the plate ends that pollutes the lumen flux); the ends are
    # pinned with a stiff surface tether, otherwise the tip nodes creep
    # downstream without bound once their kernels straddle the boundary
    mesh = merge_meshes(_plate_mesh(setup, -w, 0.0, h_cell),
                        _plate_mesh(setup, D, D + w, h_cell))
    kappa_b = kappa_b_coeff * dx / dt ** 2
    eta_b = eta_b_coeff * setup.rho / dt
    kappa_pin = 2.5 * dx / dt
    eta_pin = 0.25 * setup.rho / dt
    spec = StructureSpec(mesh, RigidPenalty(kappa_b, eta_b),
                         surface_tethers=[
                             SurfaceTether("left", kappa_pin, eta_pin),
                             SurfaceTether("right", kappa_pin, eta_pin),
                         ],
                         body_tether=BodyTether(kappa_b, eta_b))

    def profile(x, y, t):
        return setup.exact_velocity(x, y)

    grid = MACGrid(n, n, dx, bc={s: DirichletVelocity(profile)
                                 for s in ("left", "right", "bottom", "top")})
    cfg = SimulationConfig(
        grid, spec, CouplingConfig(scheme, kernel, ghost=3),
        rho=setup.rho, mu=setup.mu,
        dt=dt, t_final=t_final, poisson_method=poisson_method,
        mass_solve_method="direct",
        initial_velocity=lambda x, y: setup.exact_velocity(x, y),
    )
    row = BenchmarkRow("channel_flow", scheme, "p1", str(kernel), mfac, n,
                       mesh.n_nodes, dx, mesh.longest_edge(), dt, t_final,
                       kappa_b=kappa_b, eta_b=eta_b)
    return cfg, setup, row


def channel_error_norms(sim, setup: ChannelFlowSetup) -> tuple[float, float, float]:
    """Velocity error vs the rotated Poiseuille solution over the lumen,
    excluding a 2-cell layer around each plate."""
    grid = sim.config.grid
    dx = grid.dx
    vel = sim.state.fluid
    D = setup.plate_gap
    errs = []
    for coords, comp, num in ((grid.u_face_coords(), 0, vel.u),
                              (grid.v_face_coords(), 1, vel.v)):
        x, y = coords
        eta = setup.eta(x, y)
        mask = (eta >= 2 * dx) & (eta <= D - 2 * dx)
        exact = setup.exact_velocity(x, y)[comp]
        errs.append((num - exact)[mask].ravel())
    e = np.concatenate(errs)
    dx2 = dx * dx
    return (float(np.sum(np.abs(e)) * dx2),
            float(np.sqrt(np.sum(e ** 2) * dx2)),
            float(np.abs(e).max()))


def run_channel_flow(scheme: str, mfac: float, n: int, **kw) -> BenchmarkRow:
    cfg, setup, row = channel_flow_config(scheme, mfac, n, **kw)
    _, sim = run(cfg)
    row.error_l1, row.error_l2, row.error_linf = channel_error_norms(sim, setup)
    return _finalize_row(row, sim)


def run_channel_control(n: int, t_final: float = 6.0, cfl: float = 0.2,
                        poisson_method: str = "direct") -> BenchmarkRow:
    """No-structure control: pure fluid discretization error floor.

    Uses the axis-aligned (theta = 0) channel, whose analytic profile is a
    steady solution of the plain fluid problem, so the measured error is the
    solver floor without any coupling contribution. (The rotated profile is
    only stationary when the plates supply the wall forces.)
    """
    from .fluid import FluidSolver
    setup = ChannelFlowSetup(theta=0.0)
    dx = setup.length / n
    dt = cfl * dx / setup.peak_speed

    def profile(x, y, t):
        return setup.exact_velocity(x, y)

    grid = MACGrid(n, n, dx, bc={s: DirichletVelocity(profile)
                                 for s in ("left", "right", "bottom", "top")})
    fs = FluidSolver(grid, setup.rho, setup.mu, poisson_method=poisson_method)
    xu, yu = grid.u_face_coords()
    xv, yv = grid.v_face_coords()
    vel = StaggeredField(grid, setup.exact_velocity(xu, yu)[0],
                         setup.exact_velocity(xv, yv)[1])
    p = np.zeros((n, n))
    f = StaggeredField.zeros(grid)
    t = 0.0
    for _ in range(int(round(t_final / dt))):
        vel, p = fs.step(vel, p, f, dt, t)
        t += dt

    class _Shim:
        pass

    shim = _Shim()
    shim.config = type("C", (), {"grid": grid})()
    shim.state = type("S", (), {"fluid": vel})()
    row = BenchmarkRow("channel_flow", "none", "-", "-", 0.0, n, 0, dx, 0.0,
                       dt, t_final)
    row.error_l1, row.error_l2, row.error_linf = channel_error_norms(shim, setup)
    return row


# ---------------------------------------------------------------------------
# pressure-loaded elastic band
# ---------------------------------------------------------------------------

def elastic_band_config(scheme: str, mfac: float, n: int,
                        kernel: Kernel = KERNELS["bspline3"],
                        shear_modulus: float = 200.0, band_width: float = 0.2,
                        traction: float = 5.0, ramp_time: float = 0.4,
                        t_final: float = 3.0, elastic_cfl: float = 0.3,
                        kappa_s_coeff: float = 0.1, eta_s_coeff: float = 0.1,
                        body_damping_coeff: float = 0.1,
                        poisson_method: str = "direct"
                        ) -> tuple[SimulationConfig, BenchmarkRow]:
    rho, mu = 1.0, 0.01
    height = 1.0
    dx = height / n
    wave_speed = math.sqrt(shear_modulus / rho)
    dt = elastic_cfl * dx / wave_speed
    h_cell = mfac * 2 * dx          # P2: node spacing = half the cell size
    nx = max(1, round(band_width / h_cell))
    ny = max(1, round(height / h_cell))
    x0 = 1.0 - 0.5 * band_width
    mesh = generate_block_mesh(band_width, height, nx, ny, ElementKind.P2,
                               origin=(x0, 0.0))
    kappa_s = kappa_s_coeff * dx / dt ** 2
    eta_s = eta_s_coeff * rho / dt
    spec = StructureSpec(
        mesh, IncompressibleNeoHookean(shear_modulus),
        surface_tethers=[SurfaceTether("bottom", kappa_s, eta_s),
                         SurfaceTether("top", kappa_s, eta_s)],
        body_damping=body_damping_coeff * rho / dt,
    )

    def ramp(t):
        return min(1.0, t / ramp_time) if ramp_time > 0 else 1.0

    grid = MACGrid(2 * n, n, dx, bc={
        "left": NormalTraction(lambda c, t: traction * ramp(t) * np.ones(np.shape(c))),
        "right": NormalTraction(lambda c, t: -traction * ramp(t) * np.ones(np.shape(c))),
        "bottom": DirichletVelocity(),
        "top": DirichletVelocity(),
    })
    cfg = SimulationConfig(grid, spec, CouplingConfig(scheme, kernel),
                           rho=rho, mu=mu, dt=dt, t_final=t_final,
                           ramp_time=ramp_time, poisson_method=poisson_method,
                           mass_solve_method="direct")
    row = BenchmarkRow("elastic_band", scheme, "p2", str(kernel), mfac, n,
                       mesh.n_nodes, dx, mesh.longest_edge(), dt, t_final,
                       kappa_s=kappa_s, eta_s=eta_s, load=traction)
    return cfg, row


def velocity_norms(sim) -> tuple[float, float, float]:
    vel = sim.state.fluid
    dx2 = sim.config.grid.dx ** 2
    e = np.concatenate([vel.u.ravel(), vel.v.ravel()])
    return (float(np.sum(np.abs(e)) * dx2),
            float(np.sqrt(np.sum(e ** 2) * dx2)),
            float(np.abs(e).max()))


def run_elastic_band(scheme: str, mfac: float, n: int, **kw) -> BenchmarkRow:
    cfg, row = elastic_band_config(scheme, mfac, n, **kw)
    _, sim = run(cfg)
    row.error_l1, row.error_l2, row.error_linf = velocity_norms(sim)
    return _finalize_row(row, sim)


# ---------------------------------------------------------------------------
# quasi-static solids: compressed block and Cook's membrane
# ---------------------------------------------------------------------------

def _relabel_facets(mesh: StructuralMesh, marker: str, predicate, new_marker: str):
    for idx, f in enumerate(mesh.boundary_facets):
        if f.marker != marker:
            continue
        mid = mesh.nodes[mesh.facet_nodes(f)[:2]].mean(axis=0)
        if predicate(mid):
            mesh.boundary_facets[idx] = type(f)(f.element, f.side, new_marker)


def compressed_block_config(scheme: str, kind: ElementKind, mfac: float, m: int,
                            kernel: Kernel = KERNELS["bspline3"],
                            load: float = 40.0, t_load: float = 40.0,
                            t_final: float = 100.0, dt_coeff: float = 0.001,
                            kappa_s_coeff: float = 2.5, eta_s_coeff: float = 0.25,
                            poisson_method: str = "direct"
                            ) -> tuple[SimulationConfig, BenchmarkRow]:
    """Plane-strain compression: 20x10 cm block in a 40 cm square domain.

    m is the element count along the longest (20 cm) edge; the grid size
    follows N = ceil(2 m E_FAC mfac).
    """
    rho, mu = 1.0, 0.16
    G, kappa_stab = 80.194, 374.239
    domain = 40.0
    e_fac = element_factor(kind)
    n = math.ceil(2 * m * e_fac * mfac)
    dx = domain / n
    dt = dt_coeff * dx
    width, height = 20.0, 10.0
    mesh = generate_block_mesh(width, height, m, max(1, m // 2), kind,
                               origin=(10.0, 15.0))
    cx = 20.0
    _relabel_facets(mesh, "top", lambda mid: abs(mid[0] - cx) <= width / 4, "load")
    kappa_s = kappa_s_coeff * dx / dt
    eta_s = eta_s_coeff * rho / dt
    spec = StructureSpec(
        mesh, ModifiedNeoHookean(G, kappa_stab),
        surface_tethers=[
            SurfaceTether("bottom", kappa_s, eta_s, mask=(0.0, 1.0)),
            SurfaceTether("top", kappa_s, eta_s, mask=(1.0, 0.0)),
            SurfaceTether("load", kappa_s, eta_s, mask=(1.0, 0.0)),
        ],
        surface_loads=[SurfaceLoad("load", (0.0, -load))],
    )
    grid = MACGrid(n, n, dx)
    cfg = SimulationConfig(grid, spec, CouplingConfig(scheme, kernel),
                           rho=rho, mu=mu, dt=dt, t_final=t_final,
                           ramp_time=t_load, poisson_method=poisson_method,
                           mass_solve_method="direct")
    row = BenchmarkRow("compressed_block", scheme, kind.value, str(kernel),
                       mfac, n, mesh.n_nodes, dx, mesh.longest_edge(), dt,
                       t_final, kappa_s=kappa_s, eta_s=eta_s, load=load)
    return cfg, row


def cooks_membrane_config(scheme: str, kind: ElementKind, mfac: float, m: int,
                          kernel: Kernel = KERNELS["bspline3"],
                          load: float = 4.0, t_load: float = 20.0,
                          t_final: float = 50.0, dt_coeff: float = 0.001,
                          kappa_s_coeff: float = 0.125, eta_s_coeff: float = 0.25,
                          poisson_method: str = "direct"
                          ) -> tuple[SimulationConfig, BenchmarkRow]:
    """Swept/tapered quadrilateral, left side fixed, right side loaded up."""
    rho, mu = 1.0, 0.16
    G, kappa_stab = 83.333, 388.889
    domain = 10.0
    e_fac = element_factor(kind)
    n = math.ceil(m * e_fac * mfac * 10.0 / 6.5)
    dx = domain / n
    dt = dt_coeff * dx
    mesh = generate_cook_mesh(m, kind, longest_side=6.5, domain_size=domain)
    kappa_s = kappa_s_coeff * dx / dt
    eta_s = eta_s_coeff * rho / dt
    spec = StructureSpec(
        mesh, ModifiedNeoHookean(G, kappa_stab),
        surface_tethers=[SurfaceTether("left", kappa_s, eta_s)],
        surface_loads=[SurfaceLoad("right", (0.0, load))],
    )
    grid = MACGrid(n, n, dx)
    cfg = SimulationConfig(grid, spec, CouplingConfig(scheme, kernel),
                           rho=rho, mu=mu, dt=dt, t_final=t_final,
                           ramp_time=t_load, poisson_method=poisson_method,
                           mass_solve_method="direct")
    row = BenchmarkRow("cooks_membrane", scheme, kind.value, str(kernel),
                       mfac, n, mesh.n_nodes, dx, mesh.longest_edge(), dt,
                       t_final, kappa_s=kappa_s, eta_s=eta_s, load=load)
    return cfg, row


def _qoi_node(mesh: StructuralMesh, benchmark: str) -> int:
    if benchmark == "compressed_block":
        target = np.array([20.0, 25.0])
    else:   # cooks membrane: upper right corner
        target = np.array([mesh.nodes[:, 0].max(), mesh.nodes[:, 1].max()])
    return int(np.argmin(np.linalg.norm(mesh.nodes - target, axis=1)))


def run_quasistatic(cfg: SimulationConfig, row: BenchmarkRow) -> BenchmarkRow:
    """Run to T_f; QoI = y-displacement of the probe node averaged over the
    final 5% of simulated time."""
    node = _qoi_node(cfg.structure.mesh, row.benchmark)
    samples: list[tuple[float, float]] = []

    def observer(sim, _diag):
        s = sim.state
        samples.append((s.t, float(s.chi.values[node, 1] - sim._initial[node, 1])))

    _, sim = run(cfg, observer=observer)
    tail = [q for (t, q) in samples if t >= 0.95 * cfg.t_final]
    row.qoi = float(np.mean(tail)) if tail else float(samples[-1][1])
    return _finalize_row(row, sim)


def run_compressed_block(scheme: str, kind: ElementKind, mfac: float, m: int,
                         **kw) -> BenchmarkRow:
    cfg, row = compressed_block_config(scheme, kind, mfac, m, **kw)
    return run_quasistatic(cfg, row)


def run_cooks_membrane(scheme: str, kind: ElementKind, mfac: float, m: int,
                       **kw) -> BenchmarkRow:
    cfg, row = cooks_membrane_config(scheme, kind, mfac, m, **kw)
    return run_quasistatic(cfg, row)
