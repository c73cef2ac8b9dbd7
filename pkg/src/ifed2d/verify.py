"""Theorem property suite: fast checks of the coupling identities.

Runs without any fluid stepping (frozen fields only): kernel moment
conditions, lumped-diagonal invariance of nodal spreading, conservation of
zeroth/first force moments for matched quadrature/mass pairs (with a
mismatched-pair negative control), spreading/interpolation adjointness, the
nodal projection identity, and a first-order convergence study of the
lumped force projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coupling import (
    interpolate_points,
    interpolate_velocity,
    project_velocity,
    spread_force_elemental,
    spread_force_nodal,
    spread_force_weighted,
    spread_points,
)
from .elements import ElementKind
from .fields import FEField
from .grid import MACGrid, StaggeredField
from .kernels import BSPLINE3, KERNELS, PIECEWISE_LINEAR, kernel_eval
from .mechanics import assemble_mass, assemble_stress_load, project_force
from .mesh import generate_block_mesh
from .quadrature import adaptive_rule, higher_order_rule, nodal_rule


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _interior_structure(kind: ElementKind, rng, n=2):
    grid = MACGrid(16, 16, 1.0 / 16)
    mesh = generate_block_mesh(0.4, 0.3, n, n, kind, origin=(0.3, 0.35))
    chi = FEField(mesh, mesh.nodes + 0.01 * rng.standard_normal(mesh.nodes.shape),
                  "deformation")
    return grid, mesh, chi


def check_kernel_moments(seed: int = 0, shifts: int = 64, tol: float = 1e-13
                         ) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    lattice = np.arange(-5, 7, dtype=float)
    out = []
    for name, kernel in KERNELS.items():
        worst0 = worst1 = 0.0
        for s in rng.uniform(0.0, 1.0, shifts):
            w = kernel_eval(kernel, lattice - s)
            worst0 = max(worst0, abs(w.sum() - 1.0))
            worst1 = max(worst1, abs(np.dot(lattice - s, w)))
        out.append(CheckResult(
            f"kernel moments ({name})", worst0 <= tol and worst1 <= tol,
            f"zeroth {worst0:.2e}, first {worst1:.2e} (tol {tol:.0e})"))
    return out


def check_kernel_moments_negative() -> CheckResult:
    """Truncated-support kernel must fail the zeroth moment."""
    lattice = np.arange(-5, 7, dtype=float)
    shift = 0.37
    w = kernel_eval(BSPLINE3, lattice - shift)
    w[np.abs(lattice - shift) > 0.75] = 0.0
    err = abs(w.sum() - 1.0)
    return CheckResult("kernel moments negative control (truncated support)",
                       err > 1e-3, f"zeroth-moment error {err:.2e} (must exceed 1e-3)")


def check_theorem2(seed: int = 1, tol: float = 1e-13) -> CheckResult:
    rng = np.random.default_rng(seed)
    grid, mesh, chi = _interior_structure(ElementKind.P2, rng)
    hq = higher_order_rule(mesh)
    P = rng.standard_normal((hq.n_points, 2, 2))
    L = assemble_stress_load(mesh, P, hq)
    results = []
    for lo, hi in ((0.5, 2.0), (1e-3, 1e3)):
        diag = rng.uniform(lo, hi, mesh.n_nodes)
        F = FEField(mesh, L / diag[:, None], "force")
        results.append(spread_force_weighted(F, chi, diag, grid, BSPLINE3))
    scale = max(np.abs(results[0].u_pad).max(), np.abs(results[0].v_pad).max())
    diff = max(np.abs(results[0].u_pad - results[1].u_pad).max(),
               np.abs(results[0].v_pad - results[1].v_pad).max()) / scale
    return CheckResult(
        "theorem 2: nodal spreading independent of lumped diagonal",
        diff <= tol, f"max relative difference {diff:.2e} (tol {tol:.0e})")


def check_theorem3(seed: int = 2, tol: float = 1e-10) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for kind in ElementKind:
        for kname, kernel in KERNELS.items():
            grid, mesh, chi = _interior_structure(kind, rng)
            L = rng.standard_normal((mesh.n_nodes, 2))
            one_l = L.sum(axis=0)
            chi_l = float((chi.values * L).sum())
            worst = 0.0
            res = spread_force_nodal(L, chi, grid, kernel)
            total, first = res.moments()
            worst = max(worst, np.abs(total - one_l).max() / np.abs(one_l).max(),
                        abs(first - chi_l) / abs(chi_l))
            aq = adaptive_rule(mesh, chi.values, dx=grid.dx, c_a=0.5)
            mass = assemble_mass(mesh, "consistent", rule=aq)
            F = project_force(L, mass, method="direct")
            res = spread_force_elemental(F, chi, aq, grid, kernel)
            total, first = res.moments()
            worst = max(worst, np.abs(total - one_l).max() / np.abs(one_l).max(),
                        abs(first - chi_l) / abs(chi_l))
            out.append(CheckResult(
                f"theorem 3: force moments ({kind.value}, {kname})",
                worst <= tol, f"worst relative violation {worst:.2e} (tol {tol:.0e})"))
    return out


def check_theorem3_negative(seed: int = 3) -> CheckResult:
    """Nodal interaction with a consistent mass must break conservation."""
    rng = np.random.default_rng(seed)
    grid, mesh, chi = _interior_structure(ElementKind.P2, rng)
    L = rng.standard_normal((mesh.n_nodes, 2))
    F = project_force(L, assemble_mass(mesh, "consistent"), method="direct")
    D = assemble_mass(mesh, "lumped")
    res = spread_force_weighted(F, chi, D.diag, grid, BSPLINE3)
    total, _ = res.moments()
    viol = np.abs(total - L.sum(axis=0)).max() / np.abs(L.sum(axis=0)).max()
    return CheckResult(
        "theorem 3 negative control (nodal coupling + consistent mass)",
        viol >= 1e-6, f"violation {viol:.2e} (must be >= 1e-6)")


def check_adjointness(seed: int = 4, trials: int = 20, tol: float = 1e-12
                      ) -> CheckResult:
    rng = np.random.default_rng(seed)
    grid, mesh, chi = _interior_structure(ElementKind.Q2, rng)
    worst = 0.0
    for trial in range(trials):
        vel = StaggeredField(grid, rng.standard_normal((17, 16)),
                             rng.standard_normal((16, 17)))
        quad = nodal_rule(mesh) if trial % 2 == 0 else adaptive_rule(
            mesh, chi.values, dx=grid.dx, c_a=0.5)
        Fq = rng.standard_normal((quad.n_points, 2))
        res = spread_points(Fq, chi.evaluate(quad), quad.weights, grid,
                            PIECEWISE_LINEAR if trial % 3 else BSPLINE3)
        kernel = PIECEWISE_LINEAR if trial % 3 else BSPLINE3
        f = res.field
        lhs = (np.sum(f.u * vel.u) + np.sum(f.v * vel.v)) * grid.dx ** 2
        u_ib = interpolate_velocity(vel, chi, quad, kernel)
        rhs = float(np.sum(Fq * u_ib * quad.weights[:, None]))
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1.0))
    return CheckResult("spreading/interpolation adjointness", worst <= tol,
                       f"worst relative mismatch {worst:.2e} over {trials} trials")


def check_nodal_projection_identity(seed: int = 5) -> CheckResult:
    rng = np.random.default_rng(seed)
    grid, mesh, chi = _interior_structure(ElementKind.Q2, rng)
    vel = StaggeredField(grid, rng.standard_normal((17, 16)),
                         rng.standard_normal((16, 17)))
    nq = nodal_rule(mesh)
    u_ib = interpolate_velocity(vel, chi, nq, BSPLINE3)
    U = project_velocity(u_ib, nq, assemble_mass(mesh, "lumped"))
    sampled = interpolate_points(vel, chi.values, BSPLINE3)
    same = np.array_equal(U.values, sampled)
    return CheckResult("nodal velocity projection = nodal sampling (bitwise)",
                       same, "bitwise equal" if same else "mismatch")


def force_projection_convergence(levels=(8, 16, 32)) -> tuple[list[float], float]:
    """Theorem 1 study: lumped projection of a smooth manufactured stress.

    Returns (interior max errors per level, observed order).
    """
    def stress(x, y):
        return np.array([
            [np.sin(np.pi * x) * np.cos(np.pi * y), x ** 2 * y + y],
            [np.cos(np.pi * x) + x * y ** 2, np.sin(np.pi * (x + y))],
        ])

    def div_stress(x, y):
        return np.array([
            np.pi * np.cos(np.pi * x) * np.cos(np.pi * y) + x ** 2 + 1.0,
            -np.pi * np.sin(np.pi * x) + y ** 2 + np.pi * np.cos(np.pi * (x + y)),
        ])

    errors = []
    for n in levels:
        mesh = generate_block_mesh(1.0, 1.0, n, n, ElementKind.P1)
        hq = higher_order_rule(mesh)
        P = np.array([stress(px, py) for px, py in hq.points])
        L = assemble_stress_load(mesh, P, hq)
        F = project_force(L, assemble_mass(mesh, "lumped")).values
        interior = ~mesh.boundary_node_flags
        exact = np.array([div_stress(px, py) for px, py in mesh.nodes[interior]])
        errors.append(float(np.abs(F[interior] - exact).max()))
    h = [1.0 / n for n in levels]
    order = float(np.polyfit(np.log(h), np.log(errors), 1)[0])
    return errors, order


def check_theorem1() -> CheckResult:
    errors, order = force_projection_convergence()
    return CheckResult(
        "theorem 1: lumped force projection first-order convergence",
        order >= 0.9,
        f"errors {['%.3e' % e for e in errors]}, observed order {order:.2f} (need >= 0.9)")


def run_theorem_suite(seed: int = 0) -> list[CheckResult]:
    checks: list[CheckResult] = []
    checks += check_kernel_moments(seed)
    checks.append(check_kernel_moments_negative())
    checks.append(check_theorem2(seed + 1))
    checks += check_theorem3(seed + 2)
    checks.append(check_theorem3_negative(seed + 3))
    checks.append(check_adjointness(seed + 4))
    checks.append(check_nodal_projection_identity(seed + 5))
    checks.append(check_theorem1())
    return checks
