"""Quadrature elements for the second strain gradient Euler-Bernoulli beam.

Two single-element discretisations share one DOF layout: nodal
displacements at the GLL points plus the slope, curvature and third
derivative at both ends. ``lagrange`` builds the element from modified
Lagrange differentiation matrices, ``hermite`` from a Hermite basis that
interpolates the boundary derivatives. ``oracle`` provides independent
analytical solutions.
"""

from .assembly import BasisKind, BeamConfig, ElementMatrices, assemble_hermite, assemble_lagrange, build_element, reference_preset
from .gll import GllRule, gll_rule
from .hermite import HermiteBasis, HermiteDerivatives, hermite_basis, hermite_derivative_matrices
from .lagrange import DofLayout, LagrangeWeights, ModifiedLagrangeWeights, lagrange_weights, modified_weights
from .oracle import OracleResult, buckling_oracle, frequency_oracle, static_oracle
from .solve import BoundaryCondition, ReducedSystem, SolveResult, apply_bc, solve_buckling, solve_modal, solve_static

__all__ = [
    "BasisKind", "BeamConfig", "BoundaryCondition", "DofLayout", "ElementMatrices", "GllRule",
    "HermiteBasis", "HermiteDerivatives", "LagrangeWeights", "ModifiedLagrangeWeights", "OracleResult",
    "ReducedSystem", "SolveResult", "apply_bc", "assemble_hermite", "assemble_lagrange", "build_element",
    "buckling_oracle", "frequency_oracle", "gll_rule", "hermite_basis", "hermite_derivative_matrices",
    "lagrange_weights", "modified_weights", "reference_preset", "solve_buckling", "solve_modal", "solve_static",
    "static_oracle",
]
__version__ = "0.1.0"
