"""MAC grid layout, divergence/gradient operators, ghosts, snapshot IO."""

import numpy as np
import pytest

from ifed2d.grid import (
    DirichletVelocity,
    MACGrid,
    NormalTraction,
    StaggeredField,
    divergence,
    ghosted_velocity,
    kinetic_energy,
    mac_gradient,
    read_snapshot,
    write_snapshot,
)


def test_field_shapes():
    g = MACGrid(8, 6, 0.25)
    f = StaggeredField.zeros(g)
    assert f.u.shape == (9, 6)
    assert f.v.shape == (8, 7)


def test_divergence_uniform_field_is_zero():
    g = MACGrid(8, 6, 0.25)
    f = StaggeredField(g, np.full((9, 6), 2.5), np.full((8, 7), -1.0))
    assert np.abs(divergence(f)).max() == 0.0


def test_divergence_linear_field():
    g = MACGrid(8, 6, 0.25)
    xu, _ = g.u_face_coords()
    f = StaggeredField(g, xu.copy(), np.zeros((8, 7)))
    assert np.allclose(divergence(f), 1.0)


def test_gradient_divergence_adjoint():
    # <G p, u> = -<p, D u> for random fields with zero boundary faces
    rng = np.random.default_rng(11)
    g = MACGrid(9, 7, 0.125)
    f = StaggeredField.zeros(g)
    f.u[1:-1, :] = rng.standard_normal((8, 7))
    f.v[:, 1:-1] = rng.standard_normal((9, 6))
    p = rng.standard_normal((9, 7))
    gp = mac_gradient(g, p)
    lhs = np.sum(gp.u * f.u) + np.sum(gp.v * f.v)
    rhs = -np.sum(p * divergence(f))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_kinetic_energy_value():
    g = MACGrid(4, 4, 0.5)
    f = StaggeredField(g, np.ones((5, 4)), np.zeros((4, 5)))
    assert kinetic_energy(f, 2.0) == pytest.approx(0.5 * 2.0 * 0.25 * 20)


def test_ghosts_zero_walls():
    g = MACGrid(4, 4, 0.25)
    f = StaggeredField.zeros(g)
    U, V = ghosted_velocity(f, 0.0, ng=2)
    assert np.abs(U).max() == 0.0
    assert np.abs(V).max() == 0.0


def test_ghosts_reflect_tangential_wall_value():
    def lid(x, y, t):
        return np.ones_like(np.asarray(x, dtype=float)), np.zeros_like(np.asarray(x, dtype=float))

    g = MACGrid(4, 4, 0.25, bc={"top": DirichletVelocity(lid)})
    f = StaggeredField.zeros(g)
    U, _ = ghosted_velocity(f, 0.0, ng=1)
    # u ghost above the top wall: 2 * 1 - 0 = 2
    assert np.allclose(U[1:-1, -1], 2.0)


def test_ghosts_traction_side():
    g = MACGrid(4, 4, 0.25, bc={"left": NormalTraction(1.0)})
    f = StaggeredField.zeros(g)
    f.u[0, :] = 3.0
    f.v[0, :] = 1.5
    U, V = ghosted_velocity(f, 0.0, ng=1)
    assert np.allclose(U[0, 1:-1], 3.0)     # zero-gradient normal
    assert np.allclose(V[0, 1:-1], -1.5)    # zero tangential wall


def test_dirichlet_profile_sampled_at_face_centers():
    # rotated Poiseuille inlet: face values equal the formula at face centers
    rho, mu_, p0, theta = 1.0, 0.01, 0.2, np.pi / 18
    L, D = 6.0, 1.0
    y0 = 1.9634
    chi_grad = 2 * p0 / (L / np.cos(theta) + D * np.tan(theta))

    def profile(x, y, t):
        eta = -x * np.sin(theta) + (y - y0) * np.cos(theta)
        speed = chi_grad * D / (2 * mu_) * eta * (1 - eta / D)
        speed = np.where((eta > 0) & (eta < D), speed, 0.0)
        return speed * np.cos(theta), speed * np.sin(theta)

    g = MACGrid(32, 32, L / 32, bc={"left": DirichletVelocity(profile)})
    from ifed2d.fluid import FluidSolver
    fs = FluidSolver(g, rho, mu_)
    f = StaggeredField.zeros(g)
    fs.apply_dirichlet(f, 0.0)
    xu, yu = g.u_face_coords()
    expected = profile(xu[0], yu[0], 0.0)[0]
    assert np.allclose(f.u[0, :], expected)


def test_snapshot_roundtrip_binary(tmp_path):
    g = MACGrid(5, 3, 0.2, origin=(1.0, -2.0))
    rng = np.random.default_rng(0)
    f = StaggeredField(g, rng.standard_normal((6, 3)), rng.standard_normal((5, 4)))
    p = rng.standard_normal((5, 3))
    path = tmp_path / "snap.bin"
    write_snapshot(path, f, p, time=1.25)
    g2, f2, p2, t2 = read_snapshot(path)
    assert (g2.nx, g2.ny) == (5, 3)
    assert g2.dx == pytest.approx(0.2)
    assert g2.origin == (1.0, -2.0)
    assert t2 == 1.25
    assert np.array_equal(f2.u, f.u)
    assert np.array_equal(f2.v, f.v)
    assert np.array_equal(p2, p)


def test_snapshot_text(tmp_path):
    g = MACGrid(3, 2, 0.5)
    f = StaggeredField.zeros(g)
    p = np.zeros((3, 2))
    path = tmp_path / "snap.txt"
    write_snapshot(path, f, p, time=0.0, binary=False)
    text = path.read_text()
    assert text.startswith("ifed-snapshot 3 2")
    assert "u\n" in text and "p\n" in text
