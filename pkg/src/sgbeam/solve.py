"""Boundary conditions and the static, modal and buckling solvers.

Essential conditions remove rows and columns of constrained DOFs; natural
conditions need no action in the weak form. Each end of the beam carries
four DOFs, the displacement and its first three derivatives, paired in the
energy with the shear-like resultant ``V``, the moment ``M`` and the two
higher-order moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import sqrt
from typing import Iterable

import numpy as np
import scipy.linalg as sla

from .assembly import ElementMatrices
from .linalg import KernelError, RankDeficientError, general_pencil, lu_solve, nullity, symmetric_definite_pencil

__all__ = [
    "BCKind",
    "BoundaryCondition",
    "Mode",
    "ReducedSystem",
    "SolveResult",
    "apply_bc",
    "solve_buckling",
    "solve_modal",
    "solve_static",
]

SHIFT_DRIFT_TOL = 1e-5
RIGID_THRESHOLD = 1e-3
_ORDERS = (0, 1, 2, 3)


class BCKind(str, Enum):
    SIMPLY_SUPPORTED = "ss"
    PINNED = "pinned"
    FREE_FREE = "free"
    CLAMPED_CLAMPED = "clamped"
    CANTILEVER = "cantilever"
    CUSTOM = "custom"


@dataclass(frozen=True)
class BoundaryCondition:
    """Essential constraints per end, as sets of derivative orders 0..3.

    ``ss`` fixes ``w``, ``w''`` and ``w'''`` with the moment ``M`` natural;
    this is the simply supported beam whose closed-form solution is used for
    validation. ``pinned`` fixes ``w`` only and leaves all three moments
    natural.
    """

    kind: BCKind
    left: frozenset[int]
    right: frozenset[int]

    def __post_init__(self) -> None:
        for side in (self.left, self.right):
            bad = set(side) - set(_ORDERS)
            if bad:
                raise ValueError(f"derivative orders must be in 0..3, got {sorted(bad)}")

    @classmethod
    def custom(cls, left: Iterable[int], right: Iterable[int]) -> "BoundaryCondition":
        left, right = list(left), list(right)
        for name, side in (("left", left), ("right", right)):
            if len(set(side)) != len(side):
                raise ValueError(f"{name} end constrains a DOF twice: {side}")
        return cls(BCKind.CUSTOM, frozenset(left), frozenset(right))

    @classmethod
    def simply_supported(cls) -> "BoundaryCondition":
        return cls(BCKind.SIMPLY_SUPPORTED, frozenset({0, 2, 3}), frozenset({0, 2, 3}))

    @classmethod
    def pinned(cls) -> "BoundaryCondition":
        return cls(BCKind.PINNED, frozenset({0}), frozenset({0}))

    @classmethod
    def free_free(cls) -> "BoundaryCondition":
        return cls(BCKind.FREE_FREE, frozenset(), frozenset())

    @classmethod
    def clamped_clamped(cls) -> "BoundaryCondition":
        return cls(BCKind.CLAMPED_CLAMPED, frozenset(_ORDERS), frozenset(_ORDERS))

    @classmethod
    def cantilever(cls) -> "BoundaryCondition":
        return cls(BCKind.CANTILEVER, frozenset(_ORDERS), frozenset())

    @classmethod
    def from_name(cls, name: str) -> "BoundaryCondition":
        factories = {
            "ss": cls.simply_supported,
            "pinned": cls.pinned,
            "free": cls.free_free,
            "clamped": cls.clamped_clamped,
            "cantilever": cls.cantilever,
        }
        try:
            return factories[name]()
        except KeyError:
            raise ValueError(f"unknown boundary condition {name!r}; choose from {sorted(factories)}") from None


@dataclass(frozen=True)
class ReducedSystem:
    """Matrices restricted to the free DOFs, with the map back to the full space."""

    K: np.ndarray
    G: np.ndarray
    M: np.ndarray
    f: np.ndarray
    free: np.ndarray
    constrained: np.ndarray
    element: ElementMatrices
    bc: BoundaryCondition

    @property
    def size(self) -> int:
        return self.free.size

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Embed reduced vectors (or column stacks) into the full DOF space."""
        x = np.asarray(x)
        full = np.zeros((self.element.layout.size,) + x.shape[1:], dtype=x.dtype)
        full[self.free] = x
        return full


def apply_bc(em: ElementMatrices, bc: BoundaryCondition) -> ReducedSystem:
    """Eliminate the essential DOFs of ``bc`` from ``em``."""
    layout = em.layout
    fixed = sorted(
        {layout.dof(order, "left") for order in bc.left} | {layout.dof(order, "right") for order in bc.right}
    )
    constrained = np.array(fixed, dtype=int)
    free = np.setdiff1d(np.arange(layout.size), constrained)
    sub = np.ix_(free, free)
    return ReducedSystem(
        K=em.K[sub], G=em.G[sub], M=em.M[sub], f=em.f[free],
        free=free, constrained=constrained, element=em, bc=bc,
    )


class Mode(str, Enum):
    STATIC = "static"
    MODAL = "modal"
    BUCKLING = "buckling"


@dataclass
class SolveResult:
    """Outcome of one analysis.

    Static results fill ``deflection`` (full DOF vector, derivative DOFs with
    respect to ``xi``), ``nondim_deflection`` at the nodes and the end slopes.
    Modal results fill ``frequencies`` (elastic, ascending), ``rigid_frequencies``
    and ``mode_shapes`` (full DOF vectors as columns). Buckling results fill
    ``buckling_loads``.
    """

    mode: Mode
    x: np.ndarray
    deflection: np.ndarray | None = None
    nondim_deflection: np.ndarray | None = None
    slope: tuple[float, float] | None = None
    nondim_slope: tuple[float, float] | None = None
    frequencies: np.ndarray | None = None
    rigid_frequencies: np.ndarray | None = None
    mode_shapes: np.ndarray | None = None
    buckling_loads: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def deflection_at_center(self) -> float:
        """Nondimensional deflection at ``x = 0`` (a node for odd ``N``)."""
        idx = np.flatnonzero(np.isclose(self.x, 0.0, atol=1e-14))
        if idx.size == 0:
            raise ValueError("x = 0 is not a node; use an odd node count")
        return float(self.nondim_deflection[idx[0]])


def _reference_load(em: ElementMatrices) -> float:
    q = em.cfg.load_values(em.nodal_x())
    return float(q[0]) if np.all(q == q[0]) else float(np.mean(q))


def solve_static(rs: ReducedSystem) -> SolveResult:
    """Solve ``(K - P G) u = f`` on the free DOFs.

    ``P`` is the compressive axial load of the configuration (zero for pure
    bending). Raises :class:`RankDeficientError` when the constraints leave
    a zero-energy mode.
    """
    em = rs.element
    cfg = em.cfg
    k_eff = rs.K - cfg.P * rs.G if cfg.P else rs.K
    k_null = nullity(k_eff)
    if k_null:
        raise RankDeficientError(k_null, f"stiffness singular after boundary conditions (nullspace dimension {k_null})")
    u = lu_solve(k_eff, rs.f)
    residual = np.linalg.norm(k_eff @ u - rs.f) / max(np.linalg.norm(rs.f), np.finfo(float).tiny)
    full = rs.expand(u)
    n, layout = em.n, em.layout
    q = _reference_load(em)
    L, EI = cfg.L, cfg.EI
    wbar = 100.0 * EI * full[:n] / (q * L**4) if q else np.full(n, np.nan)
    slopes = tuple(2.0 / L * full[layout.derivative(1, end)] for end in ("left", "right"))
    nd_slopes = tuple(100.0 * EI * s / (q * L**3) if q else np.nan for s in slopes)
    return SolveResult(
        mode=Mode.STATIC, x=em.nodal_x(), deflection=full, nondim_deflection=wbar,
        slope=slopes, nondim_slope=nd_slopes, diagnostics={"relative_residual": residual},
    )


def _rigid_modes(rs: ReducedSystem) -> np.ndarray:
    """Admissible zero-energy fields among linear functions, as reduced vectors."""
    em = rs.element
    layout = em.layout
    xi = em.grid.nodes
    translation = np.zeros(layout.size)
    translation[: em.n] = 1.0
    rotation = np.zeros(layout.size)
    rotation[: em.n] = xi
    rotation[layout.derivative(1, "left")] = rotation[layout.derivative(1, "right")] = 1.0
    span = np.column_stack([translation, rotation])
    if rs.constrained.size:
        coeffs = sla.null_space(span[rs.constrained])
        span = span @ coeffs
    if span.shape[1] == 0:
        return np.zeros((rs.size, 0))
    scale = np.linalg.norm(rs.K, 2) * np.linalg.norm(span, axis=0)
    energy = np.linalg.norm(em.K @ span, axis=0)
    keep = energy <= 1e-9 * np.maximum(scale, 1.0)
    return span[rs.free][:, keep]


def _condense(k: np.ndarray, d: np.ndarray, b: np.ndarray, shift: float):
    k_bb = k[np.ix_(b, b)] + shift * np.eye(b.size)
    k_bd = k[np.ix_(b, d)]
    x = np.linalg.solve(k_bb, k_bd)
    kc = k[np.ix_(d, d)] - k_bd.T @ x
    return 0.5 * (kc + kc.T), x


def _normalize_shapes(shapes: np.ndarray, n: int) -> np.ndarray:
    out = shapes.copy()
    for j in range(out.shape[1]):
        disp = out[:n, j]
        peak = np.max(np.abs(disp))
        if peak == 0.0:
            continue
        out[:, j] /= peak
        ref = out[1:n - 1, j]
        nz = np.flatnonzero(np.abs(ref) > 1e-8)
        if nz.size and ref[nz[0]] < 0:
            out[:, j] *= -1.0
    return out


def solve_modal(
    rs: ReducedSystem,
    n_modes: int,
    rigid_threshold: float = RIGID_THRESHOLD,
    force_shift: bool = False,
) -> SolveResult:
    """Lowest ``n_modes`` elastic natural frequencies.

    The massless DOFs are condensed out. Admissible rigid-body fields are
    removed by restricting the condensed problem to their mass-orthogonal
    complement; their frequencies are reported in ``rigid_frequencies``.
    If the massless block is ill-conditioned a small spectral shift is used,
    and the result is checked for insensitivity to that shift.
    """
    em = rs.element
    cfg = em.cfg
    diag_m = np.diag(rs.M)
    d = np.flatnonzero(diag_m > 0.0)
    b = np.flatnonzero(diag_m == 0.0)
    diagnostics: dict = {"shift": 0.0}

    k_bb = rs.K[np.ix_(b, b)]
    shift = 0.0
    if b.size and (force_shift or np.linalg.cond(k_bb) > 1e12):
        shift = 1e-8 * np.trace(k_bb) / b.size
    kc, x_bd = _condense(rs.K, d, b, shift) if b.size else (rs.K, np.zeros((0, d.size)))
    if shift:
        diagnostics["shift"] = shift
        ref = sla.eigh(kc, np.diag(diag_m[d]), eigvals_only=True)
        for factor in (0.1, 0.01):
            alt = sla.eigh(_condense(rs.K, d, b, shift * factor)[0], np.diag(diag_m[d]), eigvals_only=True)
            # only the requested low band matters; the top of the spectrum always moves
            pos = np.flatnonzero(ref > 1e-8 * ref.max())[:n_modes]
            drift = np.max(np.abs(np.sqrt(alt[pos] / ref[pos]) - 1.0)) if pos.size else 0.0
            diagnostics[f"shift_drift_{factor:g}"] = float(drift)
            if drift > SHIFT_DRIFT_TOL:
                raise KernelError(f"condensed spectrum depends on the shift (drift {drift:.2e})")

    m_dd = np.diag(diag_m[d])
    rigid = _rigid_modes(rs)
    rigid_d = rigid[d]
    if rigid.shape[1]:
        z = sla.null_space(rigid_d.T @ m_dd)
    else:
        z = np.eye(d.size)
    vals, vecs, worst = symmetric_definite_pencil(z.T @ kc @ z, z.T @ m_dd @ z)
    diagnostics["eig_residual"] = worst

    omega_scale = cfg.L**2 * sqrt(cfg.rhoA / cfg.EI)
    diagnostics["clipped_negative"] = int(np.sum(vals < 0))
    omega_bar = np.sqrt(np.clip(vals, 0.0, None)) * omega_scale

    rigid_bar = []
    for v in rigid.T:
        # energy as |S v|^2 keeps roundoff at eps^2 ||K|| rather than eps ||K||
        energy = float(np.sum((em.S @ rs.expand(v)) ** 2))
        rigid_bar.append(sqrt(energy / float(v @ rs.M @ v)) * omega_scale)
    extra_rigid = omega_bar < rigid_threshold
    rigid_bar.extend(omega_bar[extra_rigid].tolist())
    elastic = ~extra_rigid
    omega_bar = omega_bar[elastic]
    if n_modes > omega_bar.size:
        raise ValueError(f"requested {n_modes} modes but only {omega_bar.size} elastic modes exist")

    disp = z @ vecs[:, elastic][:, :n_modes]
    reduced = np.zeros((rs.size, n_modes))
    reduced[d] = disp
    if b.size:
        reduced[b] = -x_bd @ disp
    shapes = _normalize_shapes(rs.expand(reduced), em.n)
    return SolveResult(
        mode=Mode.MODAL, x=em.nodal_x(), frequencies=omega_bar[:n_modes],
        rigid_frequencies=np.sort(np.array(rigid_bar)), mode_shapes=shapes, diagnostics=diagnostics,
    )


def solve_buckling(rs: ReducedSystem, n_loads: int = 1) -> SolveResult:
    """Smallest positive buckling loads of ``K u = P G u`` without condensation.

    When ``K`` is positive definite the problem is solved as the
    symmetric-definite pencil ``G u = (1/P) K u``; otherwise the general
    pencil is used. Negative, complex and infinite eigenvalues are discarded
    and counted in ``diagnostics``.
    """
    em = rs.element
    cfg = em.cfg
    diagnostics: dict = {}
    try:
        np.linalg.cholesky(rs.K)
        definite = True
    except np.linalg.LinAlgError:
        definite = False
    if definite:
        mu, vecs, worst = symmetric_definite_pencil(rs.G, rs.K)
        tol = 1e-12 * max(np.max(np.abs(mu)), np.finfo(float).tiny)
        positive = mu > tol
        loads = 1.0 / mu[positive]
        vecs = vecs[:, positive]
        diagnostics["discarded"] = int(np.sum(~positive))
        diagnostics["solver"] = "symmetric-definite"
    else:
        vals, vecs, worst = general_pencil(rs.K, rs.G)
        real = np.abs(vals.imag) <= 1e-8 * np.maximum(np.abs(vals.real), 1.0)
        positive = real & (vals.real > 0)
        loads = vals.real[positive]
        vecs = vecs[:, positive].real
        diagnostics["discarded"] = int(rs.size - loads.size)
        diagnostics["discarded_complex"] = int(np.sum(~real))
        diagnostics["solver"] = "general"
    diagnostics["eig_residual"] = worst
    order = np.argsort(loads)
    loads, vecs = loads[order], vecs[:, order]
    if loads.size == 0:
        raise KernelError(f"no positive buckling load found ({diagnostics})")
    if n_loads > loads.size:
        raise ValueError(f"requested {n_loads} loads but only {loads.size} positive loads exist")
    pbar = loads[:n_loads] * cfg.L**2 / cfg.EI
    shapes = _normalize_shapes(rs.expand(vecs[:, :n_loads]), em.n)
    return SolveResult(
        mode=Mode.BUCKLING, x=em.nodal_x(), buckling_loads=pbar, mode_shapes=shapes, diagnostics=diagnostics,
    )
