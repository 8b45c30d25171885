"""Hermite interpolation basis carrying w, w', w'', w''' at the element ends.

Every basis function is a Lagrange polynomial ``L_j`` times low-degree
factors, so the k-th derivative follows from the Leibniz rule::

    (L_j Q)^(k) = sum_m binom(k, m) L_j^(m) Q^(k-m)

applied once per factor. ``L_j^(m)`` at the nodes comes from the DQ weights
(``A, B, C, D``); at other points it is obtained by differentiating the
product form directly.

The end functions carry a cubic whose monomial coefficients ``(a, b, c, d)``
have closed forms in ``L_j', L_j'', L_j'''`` at the end node. Those
coefficients reach ~1e6 at N = 21 and cancel to O(1) values near the node,
so the cubic is evaluated in its Taylor form about the node instead; the
Taylor coefficients are the same closed forms without the ``xi_j`` terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.polynomial import Polynomial

from .gll import GllRule
from .lagrange import DofLayout, LagrangeWeights, lagrange_weights

__all__ = [
    "HermiteBasis",
    "HermiteDerivatives",
    "hermite_basis",
    "hermite_derivative_matrices",
    "lagrange_basis_derivatives",
]

MAX_ORDER = 4


def lagrange_basis_derivatives(nodes: np.ndarray, x: np.ndarray, max_order: int) -> np.ndarray:
    """Derivatives of every Lagrange polynomial at arbitrary points.

    Returns an array of shape ``(max_order + 1, len(x), len(nodes))`` holding
    ``L_j^(m)(x_p)``. The numerator ``prod_{k != j} (x - xi_k)`` is built one
    linear factor at a time, updating all derivative orders.
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = nodes.size
    out = np.empty((max_order + 1, x.size, n))
    for j in range(n):
        d = np.zeros((max_order + 1, x.size))
        d[0] = 1.0
        denom = 1.0
        for k in range(n):
            if k == j:
                continue
            t = x - nodes[k]
            for m in range(max_order, 0, -1):
                d[m] = d[m] * t + m * d[m - 1]
            d[0] = d[0] * t
            denom *= nodes[j] - nodes[k]
        out[:, :, j] = d / denom
    return out


def _leibniz(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Derivative stack of a product from the derivative stacks of its factors."""
    order = left.shape[0] - 1
    out = np.zeros_like(left)
    for k in range(order + 1):
        for m in range(k + 1):
            out[k] += comb(k, m) * left[m] * right[k - m]
    return out


def _stack(poly: Polynomial, x: np.ndarray, order: int) -> np.ndarray:
    return np.array([poly.deriv(m)(x) if m else poly(x) for m in range(order + 1)])


@dataclass(frozen=True)
class HermiteBasis:
    """The N + 6 Hermite functions in :class:`DofLayout` order.

    Attributes
    ----------
    grid, weights
        Node set and its Lagrange DQ weights.
    coeffs
        Monomial cubic coefficients ``(a, b, c, d)`` per end (row 0 = left
        end, row 1 = right end) for the boundary displacement, slope and
        curvature functions.
    anchors
        Index of the Lagrange polynomial multiplying each basis function.
    factors
        Polynomial factors of each basis function besides ``L_anchor``,
        normalisation included.
    """

    grid: GllRule
    weights: LagrangeWeights
    coeffs: dict[str, np.ndarray]
    anchors: tuple[int, ...]
    factors: tuple[tuple[Polynomial, ...], ...]

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def layout(self) -> DofLayout:
        return DofLayout(self.n)

    def evaluate(self, x: np.ndarray, order: int = 0) -> np.ndarray:
        """``Gamma_j^(order)(x)`` for all basis functions, shape ``(len(x), n + 6)``."""
        if order < 0:
            raise ValueError(f"derivative order {order} not supported")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lag = lagrange_basis_derivatives(self.grid.nodes, x, order)
        return self._derivative(lag, x, order)

    def _derivative(self, lag: np.ndarray, x: np.ndarray, order: int) -> np.ndarray:
        """Order-``order`` derivatives given ``lag[m, p, j] = L_j^(m)(x_p)``."""
        out = np.empty((x.size, self.n + 6))
        for j, (anchor, parts) in enumerate(zip(self.anchors, self.factors)):
            acc = lag[: order + 1, :, anchor]
            for poly in parts:
                acc = _leibniz(acc, _stack(poly, x, order))
            out[:, j] = acc[order]
        return out


@dataclass(frozen=True)
class HermiteDerivatives:
    """``G_k[i, j] = Gamma_j^(k)(xi_i)`` for k = 1..4, each ``n x (n + 6)``."""

    G1: np.ndarray
    G2: np.ndarray
    G3: np.ndarray
    G4: np.ndarray
    dof_layout: DofLayout

    def order(self, k: int) -> np.ndarray:
        return (self.G1, self.G2, self.G3, self.G4)[k - 1]


def _end_cubics(xj: float, delta: float, l1: float, l2: float, l3: float) -> np.ndarray:
    """Monomial coefficients (a, b, c, d) of the displacement, slope and curvature cubics."""
    a3 = -1.5 / delta - l1 / 2.0
    b3 = 0.5 - 3.0 * a3 * xj
    c3 = -3.0 * a3 * xj**2 - 2.0 * b3 * xj
    d3 = -a3 * xj**3 - b3 * xj**2 - c3 * xj

    a2 = 6.0 / delta**2 + 3.0 * l1 / delta - l2 / 2.0 + l1**2
    b2 = -3.0 / delta - 3.0 * a2 * xj - l1
    c2 = 1.0 - 3.0 * a2 * xj**2 - 2.0 * b2 * xj
    d2 = -a2 * xj**3 - b2 * xj**2 - c2 * xj

    a1 = (
        1.5 / delta * (l2 - 2.0 * l1**2)
        - 10.0 / delta**3
        - 6.0 * l1 / delta**2
        - l3 / 6.0
        + l1 * l2
        - l1**3
    )
    b1 = 3.0 * l1 / delta + 6.0 / delta**2 - l2 / 2.0 + l1**2 - 3.0 * a1 * xj
    c1 = -3.0 / delta - l1 - 3.0 * a1 * xj**2 - 2.0 * b1 * xj
    d1 = 1.0 - a1 * xj**3 - b1 * xj**2 - c1 * xj
    return np.array([[a1, b1, c1, d1], [a2, b2, c2, d2], [a3, b3, c3, d3]])


def _taylor_cubics(delta: float, l1: float, l2: float, l3: float) -> list[list[float]]:
    """End cubics in ascending powers of ``xi - xi_j`` for DOF orders 0..3.

    These are the monomial closed forms taken with ``xi_j = 0``.
    """
    (a1, b1, c1, d1), (a2, b2, c2, d2), (a3, b3, c3, d3) = _end_cubics(0.0, delta, l1, l2, l3)
    return [[d1, c1, b1, a1], [d2, c2, b2, a2], [d3, c3, b3, a3], [0.0, 0.0, 0.0, 1.0 / 6.0]]


def _cubed_ratio(root: float, anchor: float) -> Polynomial:
    """``((xi - root) / (anchor - root))**3``, exactly zero at ``root``."""
    return Polynomial([0.0, 0.0, 0.0, 1.0], domain=[root, anchor], window=[0.0, 1.0])


def hermite_basis(grid: GllRule) -> HermiteBasis:
    """Construct the Hermite basis on ``grid`` (needs ``n >= 4``).

    Small ``n`` gives a valid basis but the element built from it is
    under-integrated; results below about ``n = 9`` are unreliable.
    """
    if grid.n < 4:
        raise ValueError(f"Hermite element needs n >= 4 nodes, got {grid.n}")
    x = grid.nodes
    if np.any(np.diff(x) <= 0.0):
        raise ValueError("grid nodes must be strictly increasing (no coincident nodes)")
    w = lagrange_weights(grid)
    n = grid.n
    layout = DofLayout(n)
    first, last = x[0], x[-1]

    factors: list[tuple[Polynomial, ...]] = [()] * (n + 6)
    anchors = [0] * (n + 6)
    for j in range(1, n - 1):
        factors[j] = (_cubed_ratio(first, x[j]), _cubed_ratio(last, x[j]))
        anchors[j] = j

    coeffs = {"displacement": np.zeros((2, 4)), "slope": np.zeros((2, 4)), "curvature": np.zeros((2, 4))}
    for side, (j, other, end) in enumerate(((0, n - 1, "left"), (n - 1, 0, "right"))):
        xj, xo = x[j], x[other]
        delta = xj - xo
        l1, l2, l3 = w.A[j, j], w.B[j, j], w.C[j, j]
        for name, row in zip(("displacement", "slope", "curvature"), _end_cubics(xj, delta, l1, l2, l3)):
            coeffs[name][side] = row
        pinned = _cubed_ratio(xo, xj)
        for order, taylor in enumerate(_taylor_cubics(delta, l1, l2, l3)):
            # the domain/window pair makes the argument xi - xj
            cubic = Polynomial(taylor, domain=[xj - 1.0, xj + 1.0], window=[-1.0, 1.0])
            factors[layout.dof(order, end)] = (pinned, cubic)
            anchors[layout.dof(order, end)] = j

    for arr in coeffs.values():
        arr.setflags(write=False)
    return HermiteBasis(grid=grid, weights=w, coeffs=coeffs, anchors=tuple(anchors), factors=tuple(factors))


def hermite_derivative_matrices(basis: HermiteBasis) -> HermiteDerivatives:
    """Derivative matrices of the basis at the GLL nodes, orders 1 to 4."""
    x = basis.grid.nodes
    w = basis.weights
    lag = np.stack([w.order(m) for m in range(MAX_ORDER + 1)])
    mats = []
    for k in range(1, MAX_ORDER + 1):
        g = basis._derivative(lag, x, k)
        g.setflags(write=False)
        mats.append(g)
    return HermiteDerivatives(*mats, dof_layout=basis.layout)
