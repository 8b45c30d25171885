"""Lagrange differential-quadrature weighting matrices.

Index convention (used throughout the package): arrays are 0-based. Row
``i`` of a weighting matrix is the collocation node ``xi[i]``; node 1 and
node N of the usual 1-based notation are rows ``0`` and ``n - 1``. Column
layout of the extended (N + 6) DOF space is described by :class:`DofLayout`.
All derivatives are taken with respect to the element coordinate
``xi = 2x/L`` in ``[-1, 1]``, including the six boundary-derivative DOFs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .gll import GllRule

__all__ = [
    "DofLayout",
    "LagrangeWeights",
    "ModifiedLagrangeWeights",
    "lagrange_weights",
    "modified_weights",
    "BoundaryRows",
]

BoundaryRows = Literal["recursive", "printed"]

# order of the appended boundary-derivative DOFs
_DERIV_ORDERS = (1, 1, 2, 2, 3, 3)
_DERIV_ENDS = ("left", "right") * 3


@dataclass(frozen=True)
class DofLayout:
    """Ordering of the extended DOF vector.

    ``{w_1..w_N, w'_1, w'_N, w''_1, w''_N, w'''_1, w'''_N}`` maps to indices
    ``0..n-1`` for the nodal displacements followed by ``n..n+5`` for the
    boundary derivatives.
    """

    n: int

    @property
    def size(self) -> int:
        return self.n + 6

    def displacement(self, node: int) -> int:
        if not 0 <= node < self.n:
            raise IndexError(f"node {node} outside 0..{self.n - 1}")
        return node

    def derivative(self, order: int, end: str) -> int:
        """Index of the ``order``-th derivative DOF at ``end`` ('left'/'right')."""
        if order not in (1, 2, 3):
            raise ValueError(f"boundary derivative order must be 1, 2 or 3, got {order}")
        if end not in ("left", "right"):
            raise ValueError(f"end must be 'left' or 'right', got {end!r}")
        return self.n + 2 * (order - 1) + (end == "right")

    def dof(self, order: int, end: str) -> int:
        """Index of DOF ``w^(order)`` at an end; ``order = 0`` is the end displacement."""
        if order == 0:
            return 0 if end == "left" else self.n - 1
        return self.derivative(order, end)

    def label(self, index: int) -> str:
        if 0 <= index < self.n:
            return f"w[{index}]"
        k = index - self.n
        if not 0 <= k < 6:
            raise IndexError(index)
        return "w" + "'" * _DERIV_ORDERS[k] + f"({_DERIV_ENDS[k]})"


@dataclass(frozen=True)
class LagrangeWeights:
    """Conventional DQ weights ``A, B, C, D`` (1st to 4th derivative)."""

    grid: GllRule
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @property
    def n(self) -> int:
        return self.grid.n

    def order(self, k: int) -> np.ndarray:
        """Weighting matrix of derivative order ``k``; ``k = 0`` is the identity."""
        if k == 0:
            return np.eye(self.n)
        return (self.A, self.B, self.C, self.D)[k - 1]


@dataclass(frozen=True)
class ModifiedLagrangeWeights:
    """Weighting matrices acting on the extended DOF vector, each ``n x (n+6)``."""

    Abar: np.ndarray
    Bbar: np.ndarray
    Cbar: np.ndarray
    Dbar: np.ndarray
    dof_layout: DofLayout
    boundary_rows: BoundaryRows = field(default="recursive")

    def order(self, k: int) -> np.ndarray:
        return (self.Abar, self.Bbar, self.Cbar, self.Dbar)[k - 1]


def lagrange_weights(grid: GllRule) -> LagrangeWeights:
    """First-order weights from the node-difference products; higher orders by products.

    Off-diagonal ``A_ij = M(xi_i) / ((xi_i - xi_j) M(xi_j))`` with
    ``M(xi_i) = prod_{k != i} (xi_i - xi_k)``; diagonal entries are the
    negative row sums so that constants differentiate to zero exactly.
    """
    x = np.asarray(grid.nodes, dtype=float)
    n = x.size
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise ValueError("grid has coincident nodes")
    m = np.prod(diff, axis=1)
    A = (m[:, None] / m[None, :]) / diff
    np.fill_diagonal(A, 0.0)
    A[np.arange(n), np.arange(n)] = -A.sum(axis=1)
    B = A @ A
    C = B @ A
    D = B @ B
    for mat in (A, B, C, D):
        mat.setflags(write=False)
    return LagrangeWeights(grid=grid, A=A, B=B, C=C, D=D)


def modified_weights(w: LagrangeWeights, boundary_rows: BoundaryRows = "recursive") -> ModifiedLagrangeWeights:
    """Append the six boundary-derivative columns to ``A, B, C, D``.

    Interior rows are the conventional weights with zeros in the appended
    columns, and ``Abar`` is ``A`` padded with zeros. Boundary rows (first and
    last node) of ``Bbar`` are ``sum_{k interior} A_ik A_kj`` plus ``A_i1`` and
    ``A_iN`` on the ``w'`` columns.

    For ``Cbar`` and ``Dbar`` two boundary-row forms are available:

    ``"recursive"`` (default)
        Each order is ``A`` applied to the previous derivative field with the
        end values replaced by the DOFs: ``Cbar_i = sum_k A_ik B_kj`` over
        interior ``k`` plus ``A_i1, A_iN`` on the ``w''`` columns, and
        ``Dbar_i = sum_k A_ik C_kj`` plus ``A_i1, A_iN`` on ``w'''``. These rows
        differentiate polynomials of degree <= N-1 exactly.
    ``"printed"``
        ``Cbar_i = sum_k B_ik A_kj`` and ``Dbar_i = sum_k B_ik B_kj`` over
        interior ``k`` with the same appended ``A_i1, A_iN`` entries. Kept for
        comparison; under simply-supported conditions that also fix ``w''``
        and ``w'''`` this form loses the end-slope contribution and the element
        does not converge.
    """
    if boundary_rows not in ("recursive", "printed"):
        raise ValueError(f"unknown boundary_rows {boundary_rows!r}")
    n = w.n
    layout = DofLayout(n)
    A, B, C, D = w.A, w.B, w.C, w.D
    inner = slice(1, n - 1)

    def padded(mat: np.ndarray) -> np.ndarray:
        out = np.zeros((n, n + 6))
        out[:, :n] = mat
        return out

    Abar, Bbar, Cbar, Dbar = padded(A), padded(B), padded(C), padded(D)
    for i in (0, n - 1):
        Bbar[i, :n] = A[i, inner] @ A[inner, :]
        if boundary_rows == "recursive":
            Cbar[i, :n] = A[i, inner] @ B[inner, :]
            Dbar[i, :n] = A[i, inner] @ C[inner, :]
        else:
            Cbar[i, :n] = B[i, inner] @ A[inner, :]
            Dbar[i, :n] = B[i, inner] @ B[inner, :]
        for mat, order in ((Bbar, 1), (Cbar, 2), (Dbar, 3)):
            mat[i, layout.derivative(order, "left")] = A[i, 0]
            mat[i, layout.derivative(order, "right")] = A[i, n - 1]
    for mat in (Abar, Bbar, Cbar, Dbar):
        mat.setflags(write=False)
    return ModifiedLagrangeWeights(Abar, Bbar, Cbar, Dbar, layout, boundary_rows)
