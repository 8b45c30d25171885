"""Gauss-Lobatto-Legendre nodes and weights on [-1, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GllRule", "gll_rule", "legendre_with_derivative"]

NEWTON_TOL = 1.0e-15
NEWTON_MAXITER = 100


@dataclass(frozen=True)
class GllRule:
    """An N-point Gauss-Lobatto-Legendre rule.

    Attributes
    ----------
    n : int
        Number of nodes (>= 2).
    nodes : numpy.ndarray
        Strictly increasing nodes, ``nodes[0] == -1`` and ``nodes[-1] == 1``.
    weights : numpy.ndarray
        Positive quadrature weights summing to 2.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature sum of ``values`` sampled at the nodes."""
        return float(np.dot(self.weights, values))


def legendre_with_derivative(degree: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``P_n(x)``, ``P_n'(x)`` and ``P_n''(x)`` for ``n = degree``.

    Uses the three-term recurrence for the values and the derivative
    recurrence ``P_k' = P_{k-2}' + (2k - 1) P_{k-1}``, which stays valid at
    ``x = +-1``.
    """
    x = np.asarray(x, dtype=float)
    p_prev, p = np.ones_like(x), x.copy()
    dp_prev, dp = np.zeros_like(x), np.ones_like(x)
    ddp_prev, ddp = np.zeros_like(x), np.zeros_like(x)
    if degree == 0:
        return p_prev, dp_prev, ddp_prev
    for k in range(2, degree + 1):
        p_next = ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
        dp_next = dp_prev + (2 * k - 1) * p
        ddp_next = ddp_prev + (2 * k - 1) * dp
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
        ddp_prev, ddp = ddp, ddp_next
    return p, dp, ddp


def gll_rule(n: int) -> GllRule:
    """Build the ``n``-point GLL rule.

    Interior nodes are the roots of ``P'_{n-1}``, found by Newton iteration
    from Chebyshev-Gauss-Lobatto guesses. Only the left half is iterated; the
    right half is mirrored so the rule is exactly symmetric.

    Raises
    ------
    ValueError
        If ``n < 2``.
    RuntimeError
        If Newton iteration fails to converge.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"GLL rule needs n >= 2 nodes, got {n!r}")
    n = int(n)
    degree = n - 1
    nodes = np.empty(n)
    nodes[0], nodes[-1] = -1.0, 1.0

    half = (n - 2) // 2  # interior nodes strictly left of 0
    if half:
        k = np.arange(1, half + 1)
        x = -np.cos(np.pi * k / degree)
        for _ in range(NEWTON_MAXITER):
            _, dp, ddp = legendre_with_derivative(degree, x)
            step = dp / ddp
            x = x - step
            if np.max(np.abs(step)) <= NEWTON_TOL:
                break
        else:
            raise RuntimeError(f"GLL Newton iteration did not converge for n={n}")
        nodes[1 : half + 1] = x
        nodes[n - 1 - half : n - 1] = -x[::-1]
    if n % 2 == 1:
        nodes[n // 2] = 0.0

    p, _, _ = legendre_with_derivative(degree, nodes)
    weights = 2.0 / (n * degree * p**2)
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return GllRule(n=n, nodes=nodes, weights=weights)
