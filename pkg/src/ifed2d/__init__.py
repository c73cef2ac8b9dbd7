"""2D immersed finite element-finite difference (IFED) toolkit.

Finite element structures on unstructured meshes coupled to a staggered-grid
incompressible Navier-Stokes solver through regularized delta kernels, with
both nodal (lumped-mass, node-quadrature) and elemental (consistent-mass,
adaptive-quadrature) coupling schemes, plus the benchmark harness that
exercises them.
"""

from .coupling import CouplingConfig, interpolate_velocity, project_velocity
from .elements import ElementKind
from .errors import (
    BlowUpError,
    IfedError,
    InvertedElementError,
    MeshQualityError,
    OutOfDomainError,
    RefinementCapError,
    SolverError,
    UnsupportedConfigurationError,
)
from .fields import FEField
from .grid import DirichletVelocity, MACGrid, NormalTraction, StaggeredField
from .kernels import BSPLINE3, KERNELS, PIECEWISE_LINEAR, Kernel
from .materials import IncompressibleNeoHookean, ModifiedNeoHookean, RigidPenalty
from .mesh import StructuralMesh, generate_block_mesh, generate_cook_mesh
from .quadrature import (
    MeshQuadrature,
    QuadratureFamily,
    adaptive_rule,
    consistent_rule,
    gauss_rule,
    higher_order_rule,
    nodal_rule,
)
from .stepper import Simulation, SimulationConfig, StructureSpec, run

__version__ = "0.1.0"

__all__ = [
    "BSPLINE3",
    "BlowUpError",
    "CouplingConfig",
    "DirichletVelocity",
    "ElementKind",
    "FEField",
    "IfedError",
    "IncompressibleNeoHookean",
    "InvertedElementError",
    "KERNELS",
    "Kernel",
    "MACGrid",
    "MeshQuadrature",
    "MeshQualityError",
    "ModifiedNeoHookean",
    "NormalTraction",
    "OutOfDomainError",
    "PIECEWISE_LINEAR",
    "QuadratureFamily",
    "RefinementCapError",
    "RigidPenalty",
    "Simulation",
    "SimulationConfig",
    "SolverError",
    "StaggeredField",
    "StructuralMesh",
    "StructureSpec",
    "UnsupportedConfigurationError",
    "adaptive_rule",
    "consistent_rule",
    "gauss_rule",
    "generate_block_mesh",
    "generate_cook_mesh",
    "higher_order_rule",
    "interpolate_velocity",
    "nodal_rule",
    "project_velocity",
    "run",
]
