"""Element matrices of the single-element strain-gradient beam.

All integrals use the element's own GLL rule. With ``H`` the diagonal weight
matrix and ``J = L/2`` the Jacobian::

    K = 8EI/L^3 B'HB + g1^2 32EI/L^5 C'HC + g2^4 128EI/L^7 D'HD
    G = 2/L A'HA                      (per unit axial load)
    M = rho A L/2 H                   (displacement DOFs only)
    f = L/2 q H                       (displacement DOFs only)

where ``A..D`` are the first to fourth derivative operators of the chosen
basis, each ``N x (N+6)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from math import sqrt
from typing import Callable

import numpy as np

from .gll import GllRule, gll_rule
from .hermite import HermiteDerivatives, hermite_basis, hermite_derivative_matrices
from .lagrange import DofLayout, ModifiedLagrangeWeights, lagrange_weights, modified_weights

__all__ = [
    "BasisKind",
    "BeamConfig",
    "ElementMatrices",
    "assemble_hermite",
    "assemble_lagrange",
    "build_element",
    "reference_preset",
]


class BasisKind(str, Enum):
    LAGRANGE = "lagrange"
    HERMITE = "hermite"


@dataclass(frozen=True)
class BeamConfig:
    """Constants of one prismatic beam problem (SI units).

    ``q`` may be a constant or a callable of the physical coordinate
    ``x`` in ``[-L/2, L/2]``. ``P`` is a compressive axial load, used only by
    the static solver.
    """

    L: float = 1.0
    E: float = 3.0e6
    I: float = 1.0
    A: float = 1.0
    rho: float = 1.0
    g1: float = 0.015
    g2: float = 0.01
    q: float | Callable[[np.ndarray], np.ndarray] = 1.0
    P: float = 0.0

    def __post_init__(self) -> None:
        for name in ("L", "E", "I", "A", "rho"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        for name in ("g1", "g2"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be non-negative, got {value!r}")

    @property
    def EI(self) -> float:
        return self.E * self.I

    @property
    def rhoA(self) -> float:
        return self.rho * self.A

    @property
    def is_classical(self) -> bool:
        return self.g1 == 0.0 and self.g2 == 0.0

    def check_oracle_ratio(self) -> None:
        """Raise unless the exponential ansatz has real static exponents."""
        if self.g2 > 0 and not self.g1 > sqrt(2.0) * self.g2:
            raise ValueError(
                f"analytical solution needs g1/g2 > sqrt(2); got g1={self.g1}, g2={self.g2}"
            )

    def load_values(self, x: np.ndarray) -> np.ndarray:
        if callable(self.q):
            return np.broadcast_to(np.asarray(self.q(x), dtype=float), x.shape).copy()
        return np.full(x.shape, float(self.q))

    def with_(self, **changes) -> "BeamConfig":
        return replace(self, **changes)


def reference_preset() -> BeamConfig:
    """Validation configuration: L=1, E=3e6, rho=1, q=1, g1=0.015, g2=0.01, I=A=1."""
    return BeamConfig()


@dataclass(frozen=True)
class ElementMatrices:
    """Assembled element in the ``N + 6`` DOF space.

    ``G`` is the geometric stiffness per unit axial load. ``S`` is a strain
    operator with ``K = S.T @ S``; its rows weight the 2nd, 3rd and 4th
    derivative operators by the square roots of their energy coefficients.
    ``derivatives[k]`` maps the DOF vector to the ``k``-th derivative with
    respect to ``xi`` at the nodes (``k = 1..4``).
    """

    K: np.ndarray
    G: np.ndarray
    M: np.ndarray
    f: np.ndarray
    S: np.ndarray
    basis_kind: BasisKind
    layout: DofLayout
    cfg: BeamConfig
    grid: GllRule
    derivatives: dict[int, np.ndarray] = field(repr=False)

    @property
    def n(self) -> int:
        return self.grid.n

    def nodal_x(self) -> np.ndarray:
        return 0.5 * self.cfg.L * self.grid.nodes


def _assemble(cfg: BeamConfig, ops: dict[int, np.ndarray], grid: GllRule, kind: BasisKind) -> ElementMatrices:
    n = grid.n
    layout = DofLayout(n)
    for k, op in ops.items():
        if op.shape != (n, n + 6):
            raise ValueError(f"derivative operator {k} has shape {op.shape}, expected {(n, n + 6)}")
    h = grid.weights
    L, EI = cfg.L, cfg.EI
    coeff = {
        2: 8.0 * EI / L**3,
        3: cfg.g1**2 * 32.0 * EI / L**5,
        4: cfg.g2**4 * 128.0 * EI / L**7,
    }
    blocks = [np.sqrt(coeff[k] * h)[:, None] * ops[k] for k in (2, 3, 4) if coeff[k] > 0.0]
    S = np.vstack(blocks)
    K = S.T @ S
    K = 0.5 * (K + K.T)

    a = ops[1]
    G = (2.0 / L) * (a.T * h) @ a
    G = 0.5 * (G + G.T)

    size = layout.size
    M = np.zeros((size, size))
    M[np.arange(n), np.arange(n)] = 0.5 * cfg.rhoA * L * h
    f = np.zeros(size)
    f[:n] = 0.5 * L * cfg.load_values(0.5 * L * grid.nodes) * h

    for arr in (K, G, M, f, S):
        arr.setflags(write=False)
    return ElementMatrices(K=K, G=G, M=M, f=f, S=S, basis_kind=kind, layout=layout, cfg=cfg, grid=grid, derivatives=ops)


def assemble_lagrange(cfg: BeamConfig, mw: ModifiedLagrangeWeights, grid: GllRule) -> ElementMatrices:
    """Element matrices for the Lagrange-based element."""
    if mw.dof_layout.n != grid.n:
        raise ValueError(f"weights built for n={mw.dof_layout.n} but grid has n={grid.n}")
    ops = {k: mw.order(k) for k in (1, 2, 3, 4)}
    return _assemble(cfg, ops, grid, BasisKind.LAGRANGE)


def assemble_hermite(cfg: BeamConfig, hd: HermiteDerivatives, grid: GllRule) -> ElementMatrices:
    """Element matrices for the Hermite-based element."""
    if hd.dof_layout.n != grid.n:
        raise ValueError(f"derivatives built for n={hd.dof_layout.n} but grid has n={grid.n}")
    ops = {k: hd.order(k) for k in (1, 2, 3, 4)}
    return _assemble(cfg, ops, grid, BasisKind.HERMITE)


def build_element(cfg: BeamConfig, n: int, basis: str | BasisKind, boundary_rows: str = "recursive") -> ElementMatrices:
    """Construct grid, weights and element matrices in one call."""
    kind = BasisKind(basis)
    grid = gll_rule(n)
    if kind is BasisKind.LAGRANGE:
        mw = modified_weights(lagrange_weights(grid), boundary_rows=boundary_rows)
        return assemble_lagrange(cfg, mw, grid)
    hd = hermite_derivative_matrices(hermite_basis(grid))
    return assemble_hermite(cfg, hd, grid)
