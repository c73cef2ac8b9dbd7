"""Structural mechanics tests.

Oracles: symbolic differentiation (sympy) for the manufactured-stress
divergence, central finite differences of the energy for the PK1 stress,
and hand-assembled facet integrals for the tethers.
"""

import numpy as np
import pytest
import sympy as sym

from ifed2d.elements import ElementKind
from ifed2d.fields import FEField
from ifed2d.materials import (
    IncompressibleNeoHookean,
    ModifiedNeoHookean,
    RigidPenalty,
    pk1_stress,
    stabilization_pressure,
    strain_energy,
)
from ifed2d.mechanics import (
    add_body_tether,
    add_surface_tether,
    add_surface_traction,
    assemble_load_vector,
    assemble_mass,
    assemble_stress_load,
    deformation_gradient,
    deformation_gradients,
    facet_quadrature,
    project_force,
    quad_basis,
)
from ifed2d.mesh import StructuralMesh, generate_block_mesh
from ifed2d.quadrature import consistent_rule, higher_order_rule, nodal_rule


@pytest.fixture(scope="module")
def manufactured_stress():
    """Smooth PK1 field and its divergence, generated symbolically."""
    x, y = sym.symbols("x y")
    P = sym.Matrix([
        [sym.sin(sym.pi * x) * sym.cos(sym.pi * y), x**2 * y + y],
        [sym.cos(sym.pi * x) + x * y**2, sym.sin(sym.pi * (x + y))],
    ])
    divP = sym.Matrix([sum(sym.diff(P[d, j], [x, y][j]) for j in range(2))
                       for d in range(2)])
    P_fn = sym.lambdify((x, y), P, "numpy")
    div_fn = sym.lambdify((x, y), divP, "numpy")
    return P_fn, div_fn


def eval_stress(P_fn, points):
    out = np.empty((points.shape[0], 2, 2))
    for q, (px, py) in enumerate(points):
        out[q] = P_fn(px, py)
    return out


# ---------------------------------------------------------------------------
# deformation gradient
# ---------------------------------------------------------------------------

def test_identity_deformation_gradient():
    m = generate_block_mesh(1.0, 1.0, 2, 2, ElementKind.Q1)
    chi = FEField.identity_deformation(m)
    F = deformation_gradients(chi, higher_order_rule(m))
    assert np.abs(F - np.eye(2)).max() < 1e-13


@pytest.mark.parametrize("kind", list(ElementKind))
def test_affine_deformation_gradient(kind):
    m = generate_block_mesh(1.0, 2.0, 2, 2, kind)
    A = np.array([[1.2, 0.4], [-0.1, 0.8]])
    b = np.array([0.3, -0.2])
    chi = FEField(m, m.nodes @ A.T + b, "deformation")
    F = deformation_gradients(chi, higher_order_rule(m))
    assert np.abs(F - A).max() < 1e-12


def test_quadratic_deformation_matches_fd():
    m = generate_block_mesh(1.0, 1.0, 2, 2, ElementKind.P2)
    disp = np.column_stack([0.1 * m.nodes[:, 0] ** 2, 0.05 * m.nodes[:, 1] ** 2])
    chi = FEField(m, m.nodes + disp, "deformation")
    e, xi = 3, np.array([0.22, 0.31])
    F = deformation_gradient(chi, e, xi)
    h = 1e-6
    X0 = m.map_to_physical(e, xi)
    J = m.jacobian(e, xi)
    fd = np.empty((2, 2))
    for d in range(2):
        dxi = np.linalg.solve(J, np.eye(2)[d] * h)   # reference step for dX = h e_d
        xp = chi.evaluate_at(e, xi + dxi)
        xm = chi.evaluate_at(e, xi - dxi)
        fd[:, d] = (xp - xm) / (2 * h)
    assert np.abs(F - fd).max() < 1e-6
    assert np.isfinite(X0).all()


# ---------------------------------------------------------------------------
# PK1 stress
# ---------------------------------------------------------------------------

def test_pk1_zero_at_identity():
    for mat in (ModifiedNeoHookean(80.194, 374.239), IncompressibleNeoHookean(10.0)):
        assert np.abs(pk1_stress(mat, np.eye(2))).max() == 0.0


def test_stabilization_vanishes_at_unit_jacobian():
    mat = ModifiedNeoHookean(1.0, 374.239)
    F = np.diag([2.0, 0.5])
    assert stabilization_pressure(mat, F) == pytest.approx(0.0, abs=1e-14)


def test_stabilization_pressure_sign():
    mat = ModifiedNeoHookean(1.0, 5.0)
    assert stabilization_pressure(mat, np.diag([0.9, 0.9])) > 0   # compression
    assert stabilization_pressure(mat, np.diag([1.1, 1.1])) < 0   # dilation


@pytest.mark.parametrize(
    "mat", [ModifiedNeoHookean(80.194, 374.239), IncompressibleNeoHookean(7.5)]
)
def test_pk1_is_energy_gradient(mat):
    rng = np.random.default_rng(2024)
    h = 1e-6
    checked = 0
    while checked < 100:
        F = np.eye(2) + 0.4 * rng.standard_normal((2, 2))
        J = np.linalg.det(F)
        if not 0.5 <= J <= 2.0:
            continue
        checked += 1
        P = pk1_stress(mat, F)
        scale = max(np.abs(P).max(), 1.0)
        for a in range(2):
            for b in range(2):
                Fp, Fm = F.copy(), F.copy()
                Fp[a, b] += h
                Fm[a, b] -= h
                fd = (strain_energy(mat, Fp) - strain_energy(mat, Fm)) / (2 * h)
                assert abs(P[a, b] - fd) / scale < 1e-6


def test_simple_shear_pk1_fd():
    mat = ModifiedNeoHookean(80.194, 374.239)
    F = np.array([[1.0, 0.1], [0.0, 1.0]])
    P = pk1_stress(mat, F)
    h = 1e-6
    fd = np.empty((2, 2))
    for a in range(2):
        for b in range(2):
            Fp, Fm = F.copy(), F.copy()
            Fp[a, b] += h
            Fm[a, b] -= h
            fd[a, b] = (strain_energy(mat, Fp) - strain_energy(mat, Fm)) / (2 * h)
    assert np.abs(P - fd).max() / np.abs(P).max() < 1e-6


def test_rigid_penalty_is_stress_free():
    assert np.abs(pk1_stress(RigidPenalty(), np.diag([1.4, 0.6]))).max() == 0.0


def test_inverted_element_error_carries_id():
    from ifed2d.errors import InvertedElementError
    m = generate_block_mesh(1.0, 1.0, 2, 2, ElementKind.Q1)
    chi = FEField(m, m.nodes * np.array([1.0, -1.0]), "deformation")  # reflected
    with pytest.raises(InvertedElementError):
        assemble_load_vector(chi, ModifiedNeoHookean(1.0, 1.0), higher_order_rule(m))


# ---------------------------------------------------------------------------
# load vector and projections
# ---------------------------------------------------------------------------

def test_load_vector_zero_at_identity():
    m = generate_block_mesh(1.0, 1.0, 3, 3, ElementKind.P2)
    chi = FEField.identity_deformation(m)
    L = assemble_load_vector(chi, ModifiedNeoHookean(80.0, 374.0), higher_order_rule(m))
    assert np.abs(L).max() < 1e-12


@pytest.mark.parametrize("kind", list(ElementKind))
def test_constant_stress_equilibrium(kind):
    # constant P: interior rows of L vanish by the divergence theorem
    m = generate_block_mesh(1.0, 1.0, 3, 3, kind)
    hq = higher_order_rule(m)
    P = np.broadcast_to(np.array([[3.0, 1.0], [-2.0, 5.0]]), (hq.n_points, 2, 2))
    L = assemble_stress_load(m, P, hq)
    interior = ~m.boundary_node_flags
    assert interior.sum() > 0
    assert np.abs(L[interior]).max() < 1e-12


def test_projection_trivial_cases():
    m = generate_block_mesh(1.0, 1.0, 3, 3, ElementKind.P1)
    M = assemble_mass(m, "consistent")
    D = assemble_mass(m, "lumped")
    zero = np.zeros((m.n_nodes, 2))
    assert np.abs(project_force(zero, M).values).max() == 0.0
    assert np.abs(project_force(zero, D).values).max() == 0.0
    # lumped solve with unit diagonal returns the load unchanged
    D.diag = np.ones(m.n_nodes)
    L = np.arange(2.0 * m.n_nodes).reshape(-1, 2)
    assert np.array_equal(project_force(L, D).values, L)


def test_consistent_mass_spd_and_rowsum():
    m = generate_block_mesh(1.0, 1.0, 3, 3, ElementKind.P1)
    M = assemble_mass(m, "consistent")
    A = M.matrix.toarray()
    assert np.allclose(A, A.T)
    assert np.linalg.eigvalsh(A).min() > 0
    D = assemble_mass(m, "lumped")
    # P1 row sums equal the nodal-quadrature weights
    assert np.abs(A.sum(axis=1) - D.diag).max() < 1e-12


def test_single_p1_triangle_mass_values():
    m = StructuralMesh(ElementKind.P1, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
                       np.array([[0, 1, 2]]))
    M = assemble_mass(m, "consistent").matrix.toarray()
    assert np.allclose(M, np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 24.0)
    D = assemble_mass(m, "lumped")
    assert np.allclose(D.diag, 1.0 / 6.0)


def test_lumped_projection_first_order(manufactured_stress):
    # Theorem-style refinement study on the [0,1]^2 block with P1 elements
    P_fn, div_fn = manufactured_stress
    errors = []
    for n in (8, 16, 32):
        m = generate_block_mesh(1.0, 1.0, n, n, ElementKind.P1)
        hq = higher_order_rule(m)
        P = eval_stress(P_fn, hq.points)
        L = assemble_stress_load(m, P, hq)
        D = assemble_mass(m, "lumped")
        F = project_force(L, D).values
        interior = ~m.boundary_node_flags
        exact = np.array([div_fn(px, py).ravel() for px, py in m.nodes[interior]])
        errors.append(np.abs(F[interior] - exact).max())
    order = np.polyfit(np.log([1 / 8, 1 / 16, 1 / 32]), np.log(errors), 1)[0]
    assert order >= 0.9


def test_consistent_and_lumped_agree_under_refinement(manufactured_stress):
    # compare on a fixed interior region: the consistent solve smears the
    # O(1/DX) boundary force layer into neighboring rows, so agreement is
    # pointwise in the interior, not up to the first node ring
    P_fn, _ = manufactured_stress
    diffs = []
    for n in (8, 16, 32):
        m = generate_block_mesh(1.0, 1.0, n, n, ElementKind.P1)
        hq = higher_order_rule(m)
        P = eval_stress(P_fn, hq.points)
        L = assemble_stress_load(m, P, hq)
        Fl = project_force(L, assemble_mass(m, "lumped")).values
        Fc = project_force(L, assemble_mass(m, "consistent"), tol=1e-12).values
        dist = np.minimum.reduce([m.nodes[:, 0], 1 - m.nodes[:, 0],
                                  m.nodes[:, 1], 1 - m.nodes[:, 1]])
        inner = dist >= 0.15
        diffs.append(np.abs(Fl[inner] - Fc[inner]).max())
    order = np.polyfit(np.log([1 / 8, 1 / 16, 1 / 32]), np.log(diffs), 1)[0]
    assert order >= 0.9


# ---------------------------------------------------------------------------
# tethers and tractions
# ---------------------------------------------------------------------------

def test_tether_zero_when_at_target():
    m = generate_block_mesh(1.0, 1.0, 2, 2, ElementKind.Q1)
    bottom = [f for f in m.boundary_facets if f.marker == "bottom"]
    fq = facet_quadrature(m, bottom)
    L = np.zeros((m.n_nodes, 2))
    add_surface_tether(L, m, fq, m.nodes, np.zeros_like(m.nodes), m.nodes,
                       kappa=100.0, eta=5.0)
    assert np.abs(L).max() == 0.0


def test_tether_pure_damping():
    m = generate_block_mesh(1.0, 1.0, 2, 2, ElementKind.Q1)
    rule = consistent_rule(m)
    U = np.tile([0.5, -1.0], (m.n_nodes, 1))
    chi = FEField.identity_deformation(m)
    Uf = FEField(m, U, "velocity")
    L = np.zeros((m.n_nodes, 2))
    add_body_tether(L, rule, chi, Uf, m.nodes, kappa=0.0, eta=2.0)
    # force density -eta U integrated against phi: row sums are -eta U |supp|
    total = L.sum(axis=0)
    assert np.allclose(total, -2.0 * np.array([0.5, -1.0]) * 1.0)  # area = 1


def test_single_facet_tether_oracle():
    # displace one bottom node of a unit Q1 element; the restoring load is
    # kappa * delta * integral(phi_i phi_b) over the bottom edge:
    # edge mass 1/3 (own node), 1/6 (neighbor)
    m = generate_block_mesh(1.0, 1.0, 1, 1, ElementKind.Q1)
    bottom = [f for f in m.boundary_facets if f.marker == "bottom"]
    fq = facet_quadrature(m, bottom)
    chi = m.nodes.copy()
    delta = 0.07
    moved = 0  # node at (0, 0)
    chi[moved, 1] += delta
    kappa = 2.5
    L = np.zeros((m.n_nodes, 2))
    add_surface_tether(L, m, fq, chi, np.zeros_like(chi), m.nodes, kappa, 0.0)
    other = 1  # node at (1, 0)
    assert L[moved, 1] == pytest.approx(-kappa * delta / 3.0)
    assert L[other, 1] == pytest.approx(-kappa * delta / 6.0)
    assert np.abs(L[:, 0]).max() == 0.0


def test_component_masked_tether():
    m = generate_block_mesh(1.0, 1.0, 1, 1, ElementKind.Q1)
    bottom = [f for f in m.boundary_facets if f.marker == "bottom"]
    fq = facet_quadrature(m, bottom)
    chi = m.nodes + np.array([0.3, 0.4])
    L = np.zeros((m.n_nodes, 2))
    add_surface_tether(L, m, fq, chi, np.zeros_like(chi), m.nodes, 1.0, 0.0,
                       mask=(0.0, 1.0))
    assert np.abs(L[:, 0]).max() == 0.0
    assert np.abs(L[:, 1]).max() > 0.0


def test_surface_traction_total_force():
    m = generate_block_mesh(2.0, 1.0, 4, 2, ElementKind.P2)
    right = [f for f in m.boundary_facets if f.marker == "right"]
    fq = facet_quadrature(m, right)
    L = np.zeros((m.n_nodes, 2))
    add_surface_traction(L, m, fq, (0.0, 3.5))
    # total load = traction * side length (partition of unity)
    assert L.sum(axis=0) == pytest.approx([0.0, 3.5 * 1.0])


def test_quad_basis_shapes():
    m = generate_block_mesh(1.0, 1.0, 2, 2, ElementKind.Q2)
    rule = nodal_rule(m)
    vals, gradX = quad_basis(rule)
    assert vals.shape == (rule.n_points, 9)
    assert gradX.shape == (rule.n_points, 9, 2)
