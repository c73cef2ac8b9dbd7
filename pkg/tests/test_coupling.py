"""Coupling operator tests: spreading, interpolation, projection, theorems.

The conservation identities are checked on interior structures against the
assembled Lagrangian sums; the diagonal-invariance result is exercised
through the weighted spreading route with random positive diagonals.
"""

import numpy as np
import pytest

from ifed2d.coupling import (
    interpolate_points,
    interpolate_velocity,
    mesh_factor,
    project_velocity,
    spread_force_elemental,
    spread_force_nodal,
    spread_force_weighted,
    spread_points,
)
from ifed2d.elements import ElementKind
from ifed2d.errors import OutOfDomainError
from ifed2d.fields import FEField
from ifed2d.grid import MACGrid, StaggeredField
from ifed2d.kernels import BSPLINE3, PIECEWISE_LINEAR
from ifed2d.mechanics import assemble_mass, project_force
from ifed2d.mesh import generate_block_mesh
from ifed2d.quadrature import adaptive_rule, nodal_rule

KERNELS = [PIECEWISE_LINEAR, BSPLINE3]


def interior_mesh(kind, n=2, size=0.4):
    return generate_block_mesh(size, 0.75 * size, n, n, kind, origin=(0.3, 0.35))


def test_mesh_factor_definition():
    assert mesh_factor(0.1, 1, 0.05) == pytest.approx(2.0)
    assert mesh_factor(0.1, 2, 0.05) == pytest.approx(1.0)


def test_spread_single_point_on_face():
    # unit x-force exactly on a u-face center with the hat kernel lands on
    # that single face; the discrete integral recovers the input force
    grid = MACGrid(8, 8, 0.125)
    pos = np.array([[0.5, 0.5 + 0.0625]])   # u-face (4, 4) center
    val = np.array([[2.0, 0.0]])
    res = spread_points(val, pos, None, grid, PIECEWISE_LINEAR)
    nz = np.argwhere(res.u_pad != 0.0)
    assert len(nz) == 1
    assert tuple(nz[0]) == (4 + res.ng, 4 + res.ng)
    assert res.u_pad[nz[0][0], nz[0][1]] == pytest.approx(2.0 / 0.125**2)
    assert np.abs(res.v_pad).max() == 0.0
    total, _ = res.moments()
    assert total[0] == pytest.approx(2.0)


@pytest.mark.parametrize("kernel", KERNELS, ids=str)
@pytest.mark.parametrize("kind", list(ElementKind))
def test_theorem3_nodal(kernel, kind):
    rng = np.random.default_rng(42)
    grid = MACGrid(16, 16, 1.0 / 16)
    mesh = interior_mesh(kind)
    chi = FEField(mesh, mesh.nodes + 0.01 * rng.standard_normal(mesh.nodes.shape),
                  "deformation")
    L = rng.standard_normal((mesh.n_nodes, 2))
    res = spread_force_nodal(L, chi, grid, kernel)
    total, first = res.moments()
    one_l = L.sum(axis=0)
    chi_l = float((chi.values * L).sum())
    assert np.abs(total - one_l).max() <= 1e-10 * np.abs(one_l).max()
    assert abs(first - chi_l) <= 1e-10 * abs(chi_l)


@pytest.mark.parametrize("kernel", KERNELS, ids=str)
@pytest.mark.parametrize("kind", list(ElementKind))
def test_theorem3_elemental(kernel, kind):
    # mass assembled from the same adaptive rule used for spreading
    rng = np.random.default_rng(43)
    grid = MACGrid(16, 16, 1.0 / 16)
    mesh = interior_mesh(kind)
    chi = FEField(mesh, mesh.nodes + 0.005 * rng.standard_normal(mesh.nodes.shape),
                  "deformation")
    L = rng.standard_normal((mesh.n_nodes, 2))
    aq = adaptive_rule(mesh, chi.values, dx=grid.dx, c_a=0.5)
    mass = assemble_mass(mesh, "consistent", rule=aq)
    F = project_force(L, mass, method="direct")
    res = spread_force_elemental(F, chi, aq, grid, kernel)
    total, first = res.moments()
    one_l = L.sum(axis=0)
    chi_l = float((chi.values * L).sum())
    assert np.abs(total - one_l).max() <= 1e-10 * np.abs(one_l).max()
    assert abs(first - chi_l) <= 1e-10 * abs(chi_l)


def test_theorem3_negative_control():
    # nodal interaction paired with the consistent mass violates conservation
    rng = np.random.default_rng(44)
    grid = MACGrid(16, 16, 1.0 / 16)
    mesh = interior_mesh(ElementKind.P2)
    chi = FEField.identity_deformation(mesh)
    L = rng.standard_normal((mesh.n_nodes, 2))
    F = project_force(L, assemble_mass(mesh, "consistent"), method="direct")
    D = assemble_mass(mesh, "lumped")
    res = spread_force_weighted(F, chi, D.diag, grid, BSPLINE3)
    total, _ = res.moments()
    one_l = L.sum(axis=0)
    assert np.abs(total - one_l).max() > 1e-6 * np.abs(one_l).max()


def test_theorem2_diagonal_invariance():
    rng = np.random.default_rng(45)
    grid = MACGrid(16, 16, 1.0 / 16)
    mesh = interior_mesh(ElementKind.P2)
    chi = FEField.identity_deformation(mesh)
    L = rng.standard_normal((mesh.n_nodes, 2))
    outputs = []
    for lo, hi in ((0.5, 2.0), (1e-3, 1e3)):
        diag = rng.uniform(lo, hi, mesh.n_nodes)
        F = FEField(mesh, L / diag[:, None], "force")
        outputs.append(spread_force_weighted(F, chi, diag, grid, BSPLINE3))
    scale = np.abs(outputs[0].u_pad).max()
    du = np.abs(outputs[0].u_pad - outputs[1].u_pad).max()
    dv = np.abs(outputs[0].v_pad - outputs[1].v_pad).max()
    assert max(du, dv) <= 1e-13 * scale


def test_interpolate_uniform_field():
    grid = MACGrid(16, 16, 1.0 / 16)
    vel = StaggeredField(grid, np.full((17, 16), 1.7), np.full((16, 17), -0.6))
    rng = np.random.default_rng(46)
    pts = rng.uniform(0.3, 0.7, size=(50, 2))
    for kernel in KERNELS:
        u_ib = interpolate_points(vel, pts, kernel)
        assert np.abs(u_ib[:, 0] - 1.7).max() <= 1e-13
        assert np.abs(u_ib[:, 1] + 0.6).max() <= 1e-13


def test_interpolate_linear_field_exact():
    # first moment condition makes linear-in-x fields interpolate exactly
    grid = MACGrid(16, 16, 1.0 / 16)
    xu, _ = grid.u_face_coords()
    vel = StaggeredField(grid, 2.0 * xu + 0.5, np.zeros((16, 17)))
    rng = np.random.default_rng(47)
    pts = rng.uniform(0.3, 0.7, size=(50, 2))
    for kernel in KERNELS:
        u_ib = interpolate_points(vel, pts, kernel)
        exact = 2.0 * pts[:, 0] + 0.5
        assert np.abs(u_ib[:, 0] - exact).max() <= 1e-12


@pytest.mark.parametrize("kernel", KERNELS, ids=str)
def test_spread_interpolate_adjoint(kernel):
    # <S F, u> dx^2 = sum_q F(X_q) . U^IB(X_q) w_q with matched quadrature
    rng = np.random.default_rng(48)
    grid = MACGrid(16, 16, 1.0 / 16)
    mesh = interior_mesh(ElementKind.Q2)
    chi = FEField(mesh, mesh.nodes + 0.01 * rng.standard_normal(mesh.nodes.shape),
                  "deformation")
    for trial in range(20):
        vel = StaggeredField(grid, rng.standard_normal((17, 16)),
                             rng.standard_normal((16, 17)))
        quad = nodal_rule(mesh) if trial % 2 == 0 else adaptive_rule(
            mesh, chi.values, dx=grid.dx, c_a=0.5)
        Fq = rng.standard_normal((quad.n_points, 2))
        res = spread_points(Fq, chi.evaluate(quad), quad.weights, grid, kernel)
        f = res.field
        lhs = (np.sum(f.u * vel.u) + np.sum(f.v * vel.v)) * grid.dx**2
        u_ib = interpolate_velocity(vel, chi, quad, kernel)
        rhs = float(np.sum(Fq * u_ib * quad.weights[:, None]))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(rhs), 1.0)


def test_project_velocity_constant_both_schemes():
    grid = MACGrid(16, 16, 1.0 / 16)
    mesh = interior_mesh(ElementKind.P2)
    chi = FEField.identity_deformation(mesh)
    vel = StaggeredField(grid, np.full((17, 16), 0.9), np.full((16, 17), 0.4))
    nq = nodal_rule(mesh)
    u_ib = interpolate_velocity(vel, chi, nq, BSPLINE3)
    U = project_velocity(u_ib, nq, assemble_mass(mesh, "lumped"))
    assert np.abs(U.values - [0.9, 0.4]).max() <= 1e-12
    aq = adaptive_rule(mesh, chi.values, dx=grid.dx, c_a=0.5)
    u_ib2 = interpolate_velocity(vel, chi, aq, BSPLINE3)
    U2 = project_velocity(u_ib2, aq, assemble_mass(mesh, "consistent", rule=aq),
                          method="direct")
    assert np.abs(U2.values - [0.9, 0.4]).max() <= 1e-10


def test_nodal_projection_identity_bitwise():
    grid = MACGrid(16, 16, 1.0 / 16)
    mesh = interior_mesh(ElementKind.Q2)
    rng = np.random.default_rng(49)
    chi = FEField(mesh, mesh.nodes + 0.005 * rng.standard_normal(mesh.nodes.shape),
                  "deformation")
    vel = StaggeredField(grid, rng.standard_normal((17, 16)),
                         rng.standard_normal((16, 17)))
    nq = nodal_rule(mesh)
    u_ib = interpolate_velocity(vel, chi, nq, BSPLINE3)
    U = project_velocity(u_ib, nq, assemble_mass(mesh, "lumped"))
    sampled = interpolate_points(vel, chi.values, BSPLINE3)
    assert np.array_equal(U.values, sampled)


def test_elemental_converges_to_nodal_under_refinement():
    grid = MACGrid(64, 64, 1.0 / 64)
    xu, yu = grid.u_face_coords()
    xv, yv = grid.v_face_coords()
    vel = StaggeredField(grid, np.sin(2 * np.pi * xu) * yu,
                         np.cos(np.pi * xv) * yv**2)
    diffs = []
    for n in (2, 4, 8):
        mesh = generate_block_mesh(0.5, 0.5, n, n, ElementKind.Q1, origin=(0.25, 0.25))
        chi = FEField.identity_deformation(mesh)
        nq = nodal_rule(mesh)
        U_nodal = project_velocity(interpolate_velocity(vel, chi, nq, BSPLINE3),
                                   nq, assemble_mass(mesh, "lumped"))
        aq = adaptive_rule(mesh, chi.values, dx=grid.dx, c_a=0.5)
        U_elem = project_velocity(interpolate_velocity(vel, chi, aq, BSPLINE3),
                                  aq, assemble_mass(mesh, "consistent", rule=aq),
                                  method="direct")
        diffs.append(np.abs(U_nodal.values - U_elem.values).max())
    order = np.polyfit(np.log([0.5 / 2, 0.5 / 4, 0.5 / 8]), np.log(diffs), 1)[0]
    assert order >= 1.0


def test_out_of_domain_error_names_point():
    grid = MACGrid(8, 8, 0.125)
    pos = np.array([[0.5, 0.5], [1.6, 0.5]])   # second point 0.6 past the wall
    vals = np.ones((2, 2))
    with pytest.raises(OutOfDomainError) as err:
        spread_points(vals, pos, None, grid, BSPLINE3)
    assert "1.6" in str(err.value)
