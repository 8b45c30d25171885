"""Dense kernels with residual contracts.

Thin wrappers over LAPACK (through scipy) that verify every returned
solution or eigenpair before handing it back.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

__all__ = [
    "KernelError",
    "RankDeficientError",
    "general_pencil",
    "lu_solve",
    "nullity",
    "symmetric_definite_pencil",
]

RESIDUAL_TOL = 1e-8


class KernelError(RuntimeError):
    """A factorization or eigensolve failed its residual contract."""


class RankDeficientError(np.linalg.LinAlgError):
    """Raised for singular systems; ``nullity`` holds the nullspace dimension."""

    def __init__(self, nullity: int, message: str | None = None):
        self.nullity = nullity
        super().__init__(message or f"matrix is rank deficient (nullspace dimension {nullity})")


def nullity(a: np.ndarray, rtol: float | None = None) -> int:
    """Number of singular values below ``rtol * sigma_max``.

    The default tolerance sits at roundoff level, ``10 * max(shape) * eps``;
    single-element stiffness matrices are legitimately conditioned near 1e11.
    """
    if rtol is None:
        rtol = 10.0 * max(a.shape) * np.finfo(float).eps
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return a.shape[1]
    return int(np.sum(s <= rtol * s[0])) + max(a.shape[1] - a.shape[0], 0)


def lu_solve(a: np.ndarray, b: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Solve ``a x = b`` by partial-pivot LU and check the relative residual."""
    k = nullity(a)
    if k:
        raise RankDeficientError(k)
    lu, piv = sla.lu_factor(a, check_finite=True)
    x = sla.lu_solve((lu, piv), b)
    scale = np.linalg.norm(a, 2) * np.linalg.norm(x) + np.linalg.norm(b)
    res = np.linalg.norm(a @ x - b)
    if scale > 0 and res > rtol * scale:
        raise KernelError(f"linear solve residual {res / scale:.3e} exceeds {rtol:.1e}")
    return x


def _check_pairs(a: np.ndarray, b: np.ndarray, vals: np.ndarray, vecs: np.ndarray, tol: float) -> float:
    na, nb = np.linalg.norm(a, 2), np.linalg.norm(b, 2)
    worst = 0.0
    for lam, v in zip(vals, vecs.T):
        res = np.linalg.norm(a @ v - lam * (b @ v))
        scale = (na + abs(lam) * nb) * np.linalg.norm(v)
        worst = max(worst, res / scale if scale > 0 else res)
    if worst > tol:
        raise KernelError(f"eigenpair residual {worst:.3e} exceeds {tol:.1e}")
    return worst


def symmetric_definite_pencil(a: np.ndarray, b: np.ndarray, tol: float = RESIDUAL_TOL):
    """Eigenpairs of ``a v = lam b v`` with ``a`` symmetric, ``b`` SPD.

    Returns ascending eigenvalues, ``b``-orthonormal eigenvectors (columns)
    and the worst scaled residual.
    """
    try:
        vals, vecs = sla.eigh(a, b)
    except np.linalg.LinAlgError as exc:
        raise KernelError(f"symmetric-definite eigensolve failed: {exc}") from exc
    return vals, vecs, _check_pairs(a, b, vals, vecs, tol)


def general_pencil(a: np.ndarray, b: np.ndarray, tol: float = RESIDUAL_TOL):
    """Finite eigenpairs of the general pencil ``a v = lam b v``.

    Infinite eigenvalues (``beta == 0``) are dropped. Returns complex
    eigenvalues, eigenvectors and the worst scaled residual over the kept pairs.
    """
    try:
        alpha_beta, vecs = sla.eig(a, b, homogeneous_eigvals=True)
    except np.linalg.LinAlgError as exc:
        raise KernelError(f"general eigensolve failed: {exc}") from exc
    alpha, beta = alpha_beta
    finite = np.abs(beta) > 1e-13 * np.maximum(np.abs(alpha), 1.0)
    vals = alpha[finite] / beta[finite]
    vecs = vecs[:, finite]
    return vals, vecs, _check_pairs(a, b, vals, vecs, tol) if vals.size else 0.0
