"""Closed-form and determinant-search solutions of the gradient beam ODE.

The homogeneous solutions are exponentials ``exp(k x)`` on ``[-L/2, L/2]``
with ``k`` a root of the characteristic polynomial. Each exponential is
anchored at the end where it is largest, ``exp(k (x - x_ref))`` with
``x_ref = +L/2`` for ``Re k > 0`` and ``-L/2`` otherwise, so no entry of the
boundary matrix exceeds one in modulus even when ``|k| L`` is in the
hundreds. Conjugate pairs are replaced by the real and imaginary parts of
one member, which keeps the boundary matrix and its determinant real.

Boundary rows follow the energy pairing: at each end and for each order
``r = 0..3`` either the derivative ``w^(r)`` (essential) or its conjugate
resultant (natural) vanishes. Resultants are divided by ``EI``::

    r = 0:  V   = w''' - g1^2 w^(5) + g2^4 w^(7)
    r = 1:  M   = w''  - g1^2 w^(4) + g2^4 w^(6)
    r = 2:  Mb  = g1^2 w''' - g2^4 w^(5)
    r = 3:  Mbb = g2^4 w^(4)

The load ``q`` acts in the direction of positive ``w``, so the static
equation reads ``EI (w'''' - g1^2 w^(6) + g2^4 w^(8)) = q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, pi, sqrt
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .assembly import BeamConfig
from .solve import BCKind, BoundaryCondition

__all__ = [
    "CharacteristicRoots",
    "OracleError",
    "OracleResult",
    "buckling_determinant",
    "buckling_oracle",
    "characteristic_roots",
    "frequency_determinant",
    "frequency_oracle",
    "static_oracle",
]

FREQ_STEP = 0.5
FREQ_MAX = 600.0
LOAD_STEP = 0.05
LOAD_MAX = 50.0
ROOT_RTOL = 1e-10
DET_RESIDUAL_TOL = 1e-6


class OracleError(RuntimeError):
    """The analytical construction failed (ill-conditioning, no bracket, ...)."""


@dataclass(frozen=True)
class CharacteristicRoots:
    """Exponents of the homogeneous solutions.

    ``coeffs`` are the polynomial coefficients in ``u = k**2`` (highest
    power first); ``roots`` are the resulting exponents ``k``.
    """

    kind: str
    coeffs: np.ndarray
    roots: np.ndarray

    def residuals(self) -> np.ndarray:
        """Polynomial residual at each root, scaled by its largest term."""
        u = self.roots**2
        powers = np.arange(self.coeffs.size - 1, -1, -1)
        terms = self.coeffs[None, :] * u[:, None] ** powers[None, :]
        scale = np.max(np.abs(terms), axis=1)
        return np.abs(terms.sum(axis=1)) / np.where(scale > 0, scale, 1.0)


def _u_polynomial(kind: str, cfg: BeamConfig, parameter: float) -> np.ndarray:
    g1s, g2q = cfg.g1**2, cfg.g2**4
    if kind == "static":
        return np.array([g2q, -g1s, 1.0])
    if kind == "frequency":
        return np.array([g2q, -g1s, 1.0, 0.0, -parameter])
    if kind == "buckling":
        return np.array([g2q, -g1s, 1.0, parameter])
    raise ValueError(kind)


def _newton_refine(k: np.ndarray, coeffs: np.ndarray, steps: int = 3) -> np.ndarray:
    """Newton steps on p(k) = sum c_i k^(2 (deg - i)) for each root."""
    deg = coeffs.size - 1
    pk = np.zeros(2 * deg + 1)
    pk[::2] = coeffs
    poly = np.poly1d(pk)
    dpoly = poly.deriv()
    for _ in range(steps):
        d = dpoly(k)
        ok = np.abs(d) > 0
        step = np.where(ok, poly(k) / np.where(ok, d, 1.0), 0.0)
        k = k - step
    return k


def characteristic_roots(kind: str, cfg: BeamConfig, parameter: float = 0.0) -> CharacteristicRoots:
    """Nonzero exponents ``k`` for ``kind`` in {static, frequency, buckling}.

    ``parameter`` is ``omega**2 rho A / EI`` for frequencies and ``P / EI``
    for buckling. The polynomial in ``u = k**2`` is solved through its
    companion matrix and each ``k = +-sqrt(u)`` is polished by Newton steps
    on the polynomial in ``k``.
    """
    coeffs = _u_polynomial(kind, cfg, parameter)
    if kind == "static":
        disc = cfg.g1**4 - 4.0 * cfg.g2**4
        if disc <= 0:
            raise OracleError("static exponents are not real; need g1/g2 > sqrt(2)")
        u = (cfg.g1**2 + np.array([1.0, -1.0]) * sqrt(disc)) / (2.0 * cfg.g2**4)
        k = np.concatenate([np.sqrt(u), -np.sqrt(u)]).astype(complex)
        return CharacteristicRoots(kind, coeffs, k)
    # the static coefficients are the last nonzero entries for frequency/buckling
    companion_u = np.roots(coeffs)
    k = np.sqrt(companion_u.astype(complex))
    k = np.concatenate([k, -k])
    k = _newton_refine(k, coeffs)
    return CharacteristicRoots(kind, coeffs, k)


def _clean(k: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    scale = np.maximum(np.abs(k), 1.0)
    re = np.where(np.abs(k.real) <= tol * scale, 0.0, k.real)
    im = np.where(np.abs(k.imag) <= tol * scale, 0.0, k.imag)
    return re + 1j * im


class _Basis:
    """Real homogeneous basis: monomials, anchored exponentials, Re/Im pairs."""

    def __init__(self, roots: np.ndarray, L: float, n_poly: int):
        k = _clean(np.asarray(roots, dtype=complex))
        real = np.sort(k[k.imag == 0].real)
        cplx = k[k.imag > 0]
        cplx = cplx[np.lexsort((cplx.imag, cplx.real))]
        if real.size + 2 * cplx.size + n_poly != 8:
            raise OracleError(f"could not pair characteristic roots {roots}")
        self.L = L
        self.n_poly = n_poly
        self.real = real
        self.cplx = cplx

    def _ref(self, re: np.ndarray) -> np.ndarray:
        return np.where(re > 0, 0.5 * self.L, np.where(re < 0, -0.5 * self.L, 0.0))

    def __call__(self, x: np.ndarray, d: int) -> np.ndarray:
        """Rows of ``d``-th derivatives of all eight functions at ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        cols = []
        for p in range(self.n_poly):
            cols.append(np.zeros_like(x) if d > p else factorial(p) / factorial(p - d) * x ** (p - d))
        for k in self.real:
            cols.append(k**d * np.exp(k * (x - self._ref(np.array(k)))))
        for k in self.cplx:
            val = k**d * np.exp(k * (x - self._ref(np.array(k.real))))
            cols.append(val.real)
            cols.append(val.imag)
        return np.column_stack(cols)


def _resultant(fn: Callable[[np.ndarray, int], np.ndarray], x: np.ndarray, order: int, cfg: BeamConfig, natural: bool):
    if not natural:
        return fn(x, order)
    g1s, g2q = cfg.g1**2, cfg.g2**4
    if order == 0:
        return fn(x, 3) - g1s * fn(x, 5) + g2q * fn(x, 7)
    if order == 1:
        return fn(x, 2) - g1s * fn(x, 4) + g2q * fn(x, 6)
    if order == 2:
        return g1s * fn(x, 3) - g2q * fn(x, 5)
    return g2q * fn(x, 4)


def _boundary_rows(fn, cfg: BeamConfig, bc: BoundaryCondition) -> np.ndarray:
    rows = []
    for x, essential in ((-0.5 * cfg.L, bc.left), (0.5 * cfg.L, bc.right)):
        for order in range(4):
            rows.append(_resultant(fn, np.array([x]), order, cfg, natural=order not in essential))
    return np.vstack(rows)


def _normalized_det(mat: np.ndarray) -> tuple[float, float]:
    """Determinant after scaling rows and columns to unit norm, and the
    smallest singular value of that scaled matrix."""
    col = np.linalg.norm(mat, axis=0)
    mat = mat / np.where(col > 0, col, 1.0)
    row = np.linalg.norm(mat, axis=1)
    mat = mat / np.where(row > 0, row, 1.0)[:, None]
    s = np.linalg.svd(mat, compute_uv=False)
    return float(np.linalg.det(mat)), float(s[-1])


@dataclass
class OracleResult:
    """Analytical solution of one problem.

    For static problems ``coefficients`` and ``basis`` define ``w(x)``;
    use :meth:`deflection`, :meth:`nondim_deflection`, :meth:`slope` and
    :meth:`resultants`. Frequency and buckling problems fill
    ``frequencies`` (nondimensional, elastic only) or ``buckling_loads``.
    """

    kind: str
    cfg: BeamConfig
    bc: BoundaryCondition
    roots: CharacteristicRoots | None = None
    coefficients: np.ndarray | None = None
    frequencies: np.ndarray | None = None
    buckling_loads: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)
    _field: Callable[[np.ndarray, int], np.ndarray] | None = field(default=None, repr=False)

    def deflection(self, x, order: int = 0) -> np.ndarray:
        """``order``-th derivative of ``w`` with respect to ``x``."""
        if self._field is None:
            raise ValueError(f"{self.kind} result carries no displacement field")
        return self._field(np.atleast_1d(np.asarray(x, dtype=float)), order)

    def nondim_deflection(self, x) -> np.ndarray:
        cfg = self.cfg
        return 100.0 * cfg.EI * self.deflection(x) / (float(cfg.q) * cfg.L**4)

    def slope(self, x) -> np.ndarray:
        return self.deflection(x, 1)

    def nondim_slope(self, x) -> np.ndarray:
        """``d wbar / d(x/L)``, that is ``100 EI w' / (q L^3)``."""
        cfg = self.cfg
        return 100.0 * cfg.EI * self.slope(x) / (float(cfg.q) * cfg.L**3)

    def resultants(self, x) -> dict[str, np.ndarray]:
        """V, M, Mb, Mbb (including the factor EI) at ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        names = ("V", "M", "Mb", "Mbb")
        return {n: self.cfg.EI * _resultant(self.deflection, x, r, self.cfg, True) for r, n in enumerate(names)}

    def ode_residual(self, x) -> np.ndarray:
        """``EI (w'''' - g1^2 w^(6) + g2^4 w^(8)) - q`` at ``x``."""
        cfg = self.cfg
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lhs = self.deflection(x, 4) - cfg.g1**2 * self.deflection(x, 6) + cfg.g2**4 * self.deflection(x, 8)
        return cfg.EI * lhs - cfg.load_values(x)


def _require_constant_load(cfg: BeamConfig) -> float:
    if callable(cfg.q):
        raise ValueError("the analytical solution supports a constant load only")
    return float(cfg.q)


def _classical_static(cfg: BeamConfig, bc: BoundaryCondition) -> OracleResult:
    if bc.kind not in (BCKind.SIMPLY_SUPPORTED, BCKind.PINNED):
        raise ValueError("classical static solution is implemented for simply supported beams only")
    q, L, EI = _require_constant_load(cfg), cfg.L, cfg.EI
    # w = q (5 L^4 - 24 L^2 x^2 + 16 x^4) / (384 EI)
    poly = np.polynomial.Polynomial([5.0 * L**4, 0.0, -24.0 * L**2, 0.0, 16.0]) * (q / (384.0 * EI))

    def fn(x, d):
        return poly.deriv(d)(x) if d else poly(x)

    return OracleResult("static", cfg, bc, diagnostics={"classical": True}, _field=fn)


def static_oracle(cfg: BeamConfig, bc: BoundaryCondition | None = None) -> OracleResult:
    """Deflection under a uniform load.

    The general solution is a cubic, four anchored exponentials and the
    particular part ``q x^4 / (24 EI)``; the eight boundary rows fix the
    coefficients. Any boundary condition with a unique solution works; the
    simply supported beam is the validated case.
    """
    bc = bc or BoundaryCondition.simply_supported()
    if cfg.is_classical:
        return _classical_static(cfg, bc)
    if cfg.g2 == 0.0:
        raise ValueError("g2 = 0 with g1 > 0 is not supported by the analytical solution")
    cfg.check_oracle_ratio()
    q = _require_constant_load(cfg)
    roots = characteristic_roots("static", cfg)
    basis = _Basis(roots.roots, cfg.L, n_poly=4)
    c4 = q / (24.0 * cfg.EI)

    def particular(x, d):
        x = np.atleast_1d(x)
        return np.zeros_like(x) if d > 4 else c4 * factorial(4) / factorial(4 - d) * x ** (4 - d)

    mat = _boundary_rows(basis, cfg, bc)
    rhs = -_boundary_rows(lambda x, d: particular(x, d)[:, None], cfg, bc)[:, 0]
    col = np.linalg.norm(mat, axis=0)
    cond = np.linalg.cond(mat / col)
    if not np.isfinite(cond) or cond > 1e12:
        raise OracleError(f"boundary system is singular or ill-conditioned (condition estimate {cond:.2e})")
    coef = np.linalg.solve(mat / col, rhs) / col

    def fn(x, d):
        return basis(x, d) @ coef + particular(x, d)

    return OracleResult(
        "static", cfg, bc, roots=roots, coefficients=coef,
        diagnostics={"condition": cond}, _field=fn,
    )


def frequency_determinant(cfg: BeamConfig, bc: BoundaryCondition, omega_bar: float) -> tuple[float, float]:
    """Scaled real determinant of the frequency matrix and its smallest singular value."""
    big_omega2 = (omega_bar / cfg.L**2) ** 2
    roots = characteristic_roots("frequency", cfg, big_omega2)
    basis = _Basis(roots.roots, cfg.L, n_poly=0)
    return _normalized_det(_boundary_rows(basis, cfg, bc))


def buckling_determinant(cfg: BeamConfig, bc: BoundaryCondition, p_bar: float) -> tuple[float, float]:
    """Scaled real determinant of the stability matrix and its smallest singular value."""
    roots = characteristic_roots("buckling", cfg, p_bar / cfg.L**2)
    basis = _Basis(roots.roots, cfg.L, n_poly=2)
    return _normalized_det(_boundary_rows(basis, cfg, bc))


def _scan(
    func: Callable[[float], tuple[float, float]],
    grid: np.ndarray,
    wanted: int,
) -> tuple[list[float], list[float]]:
    """Roots of a scaled determinant along ``grid``.

    Sign changes are refined with Brent's method; local minima of the
    smallest singular value without a sign change are refined as well.
    A candidate is kept only if the determinant there is small relative to
    the determinant at the bracket ends.
    """
    def det(x):
        return _perturbed(func, x)[0]

    dets: list[float] = []
    smin: list[float] = []
    found: list[float] = []
    residuals: list[float] = []
    for x in grid[:2]:
        d, s = _perturbed(func, x)
        dets.append(d)
        smin.append(s)
    for i in range(grid.size - 1):
        if i + 1 >= len(dets):
            d, s = _perturbed(func, grid[i + 1])
            dets.append(d)
            smin.append(s)
        a, b = grid[i], grid[i + 1]
        candidate = None
        if np.sign(dets[i]) != np.sign(dets[i + 1]) and dets[i] != 0:
            candidate = brentq(det, a, b, xtol=ROOT_RTOL * b, rtol=4 * np.finfo(float).eps, maxiter=200)
        elif 0 < i and smin[i] < smin[i - 1] and smin[i] <= smin[i + 1]:
            res = minimize_scalar(lambda x: _perturbed(func, x)[1], bracket=(grid[i - 1], a, b),
                                  options={"xtol": ROOT_RTOL})
            if res.fun < 1e-9:
                candidate = float(res.x)
        if candidate is None:
            continue
        local = max(abs(dets[i]), abs(dets[i + 1]), np.finfo(float).tiny)
        d_root, s_root = _perturbed(func, candidate)
        residual = abs(d_root) / local
        if residual > DET_RESIDUAL_TOL or s_root > 1e-6:
            continue
        if found and abs(candidate - found[-1]) <= 1e-8 * candidate:
            continue
        found.append(float(candidate))
        residuals.append(float(residual))
        if len(found) == wanted:
            break
    return found, residuals


def _perturbed(func, x: float) -> tuple[float, float]:
    """Evaluate ``func``; on a defective root set retry at a nearby point."""
    try:
        return func(x)
    except OracleError:
        return func(x * (1.0 + 1e-9))


def _classical_frequencies(cfg: BeamConfig, bc: BoundaryCondition, n_modes: int) -> np.ndarray:
    if bc.kind in (BCKind.SIMPLY_SUPPORTED, BCKind.PINNED):
        return (np.arange(1, n_modes + 1) * pi) ** 2
    if bc.kind is BCKind.FREE_FREE:
        out = []
        for n in range(1, n_modes + 1):
            lo, hi = (n + 0.5) * pi - 0.5, (n + 0.5) * pi + 0.5
            out.append(brentq(lambda b: np.cos(b) * np.cosh(b) - 1.0, lo, hi, xtol=1e-14) ** 2)
        return np.array(out)
    raise ValueError("classical frequencies are implemented for simply supported and free-free beams")


def frequency_oracle(
    cfg: BeamConfig,
    bc: BoundaryCondition | None = None,
    n_modes: int = 6,
    omega_max: float = FREQ_MAX,
    step: float = FREQ_STEP,
) -> OracleResult:
    """Lowest ``n_modes`` nondimensional natural frequencies.

    The scan starts at ``step``, so the zero frequencies of a free beam are
    excluded and only elastic modes are returned.
    """
    bc = bc or BoundaryCondition.simply_supported()
    if cfg.is_classical:
        return OracleResult("frequency", cfg, bc, frequencies=_classical_frequencies(cfg, bc, n_modes),
                            diagnostics={"classical": True})
    if cfg.g2 == 0.0:
        raise ValueError("g2 = 0 with g1 > 0 is not supported by the analytical solution")
    grid = np.arange(step, omega_max + 0.5 * step, step)
    found, residuals = _scan(lambda w: frequency_determinant(cfg, bc, w), grid, n_modes)
    if len(found) < n_modes:
        raise OracleError(
            f"found {len(found)} of {n_modes} frequencies on the scan grid "
            f"[{step}, {omega_max}] with step {step}"
        )
    return OracleResult("frequency", cfg, bc, frequencies=np.array(found),
                        diagnostics={"det_residuals": residuals, "scan_step": step, "scan_max": omega_max})


def buckling_oracle(
    cfg: BeamConfig,
    bc: BoundaryCondition | None = None,
    n_loads: int = 1,
    p_max: float = LOAD_MAX,
    step: float = LOAD_STEP,
) -> OracleResult:
    """Smallest nondimensional buckling loads ``P L^2 / EI``.

    Both ends must carry ``w = 0`` so the axial load does not enter the
    boundary rows.
    """
    bc = bc or BoundaryCondition.simply_supported()
    if 0 not in bc.left or 0 not in bc.right:
        raise ValueError("buckling solution requires w = 0 at both ends")
    if cfg.is_classical:
        if bc.kind not in (BCKind.SIMPLY_SUPPORTED, BCKind.PINNED):
            raise ValueError("classical buckling is implemented for simply supported beams only")
        return OracleResult("buckling", cfg, bc, buckling_loads=(np.arange(1, n_loads + 1) * pi) ** 2,
                            diagnostics={"classical": True})
    if cfg.g2 == 0.0:
        raise ValueError("g2 = 0 with g1 > 0 is not supported by the analytical solution")
    grid = np.arange(step, p_max + 0.5 * step, step)
    found, residuals = _scan(lambda p: buckling_determinant(cfg, bc, p), grid, n_loads)
    if len(found) < n_loads:
        raise OracleError(f"found {len(found)} of {n_loads} buckling loads on [{step}, {p_max}] with step {step}")
    roots = characteristic_roots("buckling", cfg, found[0] / cfg.L**2)
    return OracleResult("buckling", cfg, bc, roots=roots, buckling_loads=np.array(found),
                        diagnostics={"det_residuals": residuals, "scan_step": step, "scan_max": p_max})
