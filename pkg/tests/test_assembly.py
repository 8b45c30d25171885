import numpy as np
import pytest

from sgbeam.assembly import BeamConfig, assemble_hermite, assemble_lagrange, build_element, reference_preset
from sgbeam.gll import gll_rule
from sgbeam.hermite import hermite_basis, hermite_derivative_matrices
from sgbeam.lagrange import lagrange_weights, modified_weights
from sgbeam.solve import BoundaryCondition, apply_bc, solve_modal, solve_static

BASES = ["lagrange", "hermite"]


def rigid_vectors(em):
    n, lay = em.n, em.layout
    t = np.zeros(lay.size)
    t[:n] = 1.0
    r = np.zeros(lay.size)
    r[:n] = em.grid.nodes
    r[lay.derivative(1, "left")] = r[lay.derivative(1, "right")] = 1.0
    return t, r


@pytest.mark.parametrize("basis", BASES)
@pytest.mark.parametrize("n", range(7, 22, 2))
def test_symmetry(basis, n):
    em = build_element(reference_preset(), n, basis)
    for mat in (em.K, em.G, em.M):
        assert np.linalg.norm(mat - mat.T) <= 1e-12 * np.linalg.norm(mat)


@pytest.mark.parametrize("basis", BASES)
@pytest.mark.parametrize("n", [5, 11, 21])
def test_rigid_nullspace(basis, n):
    em = build_element(reference_preset(), n, basis)
    norm = np.linalg.norm(em.K, 2)
    for v in rigid_vectors(em):
        assert np.linalg.norm(em.K @ v) <= 1e-9 * norm * np.linalg.norm(v)
    t, _ = rigid_vectors(em)
    assert np.linalg.norm(em.G @ t) <= 1e-9 * np.linalg.norm(em.G, 2) * np.linalg.norm(t)


@pytest.mark.parametrize("basis", BASES)
def test_strain_operator_factorises_stiffness(basis):
    em = build_element(reference_preset(), 13, basis)
    np.testing.assert_allclose(em.S.T @ em.S, em.K, atol=1e-12 * np.abs(em.K).max())


@pytest.mark.parametrize("basis", BASES)
def test_mass_and_load(basis):
    cfg = reference_preset().with_(rho=2.5, A=0.3, L=1.7, q=4.0)
    em = build_element(cfg, 9, basis)
    h = em.grid.weights
    np.testing.assert_allclose(np.diag(em.M)[:9], cfg.rho * cfg.A * cfg.L / 2 * h, rtol=1e-15)
    assert np.count_nonzero(em.M - np.diag(np.diag(em.M))) == 0
    np.testing.assert_array_equal(np.diag(em.M)[9:], 0.0)
    np.testing.assert_allclose(em.f[:9], cfg.L / 2 * 4.0 * h, rtol=1e-15)
    np.testing.assert_array_equal(em.f[9:], 0.0)


def test_callable_load():
    cfg = reference_preset().with_(q=lambda x: 1.0 + x)
    em = build_element(cfg, 7, "lagrange")
    x = em.nodal_x()
    np.testing.assert_allclose(em.f[:7], cfg.L / 2 * (1.0 + x) * em.grid.weights)
    # total load equals the integral of q over the span
    assert em.f.sum() == pytest.approx(cfg.L, rel=1e-14)


def test_classical_limit_is_bending_term_only():
    cfg = reference_preset().with_(g1=0.0, g2=0.0)
    g = gll_rule(11)
    mw = modified_weights(lagrange_weights(g))
    em = assemble_lagrange(cfg, mw, g)
    want = 8 * cfg.EI / cfg.L**3 * (mw.Bbar.T * g.weights) @ mw.Bbar
    np.testing.assert_allclose(em.K, want, atol=1e-12 * np.abs(want).max())


def test_geometric_stiffness_carries_jacobian():
    cfg = reference_preset().with_(L=2.0)
    g = gll_rule(9)
    hd = hermite_derivative_matrices(hermite_basis(g))
    em = assemble_hermite(cfg, hd, g)
    want = (2.0 / cfg.L) * (hd.G1.T * g.weights) @ hd.G1
    np.testing.assert_allclose(em.G, want, atol=1e-13 * np.abs(want).max())


@pytest.mark.parametrize("basis", BASES)
def test_scaling(basis):
    rng = np.random.default_rng(3)
    base = reference_preset()
    v = rng.normal(size=17)
    k0 = build_element(base, 11, basis).K
    k_ei = build_element(base.with_(E=2 * base.E, I=3 * base.I), 11, basis).K
    assert v @ k_ei @ v == pytest.approx(6 * (v @ k0 @ v), rel=1e-12)
    classical = base.with_(g1=0.0, g2=0.0)
    if basis == "lagrange":
        k1 = build_element(classical, 11, basis).K
        k2 = build_element(classical.with_(L=2.0), 11, basis).K
        assert v @ k2 @ v == pytest.approx((v @ k1 @ v) / 8, rel=1e-12)


@pytest.mark.parametrize("basis", BASES)
def test_quadratic_forms_nonnegative(basis):
    em = build_element(reference_preset(), 15, basis)
    rng = np.random.default_rng(7)
    v = rng.normal(size=(1000, em.layout.size))
    kq = np.einsum("ij,jk,ik->i", v, em.K, v)
    mq = np.einsum("ij,jk,ik->i", v, em.M, v)
    assert kq.min() >= -1e-12 * np.linalg.norm(em.K, 2) * (v**2).sum(axis=1).max()
    assert mq.min() >= 0.0


def test_lagrange_hermite_static_agreement():
    cfg = reference_preset()
    ss = BoundaryCondition.simply_supported()
    for n in (13, 17, 21):
        wl = solve_static(apply_bc(build_element(cfg, n, "lagrange"), ss)).deflection_at_center()
        wh = solve_static(apply_bc(build_element(cfg, n, "hermite"), ss)).deflection_at_center()
        assert abs(wl - wh) <= 1e-3 * abs(wh)


def test_reference_values():
    cfg = reference_preset()
    ss = BoundaryCondition.simply_supported()
    wl = solve_static(apply_bc(build_element(cfg, 11, "lagrange"), ss)).deflection_at_center()
    wh = solve_static(apply_bc(build_element(cfg, 11, "hermite"), ss)).deflection_at_center()
    assert wl == pytest.approx(1.2993, abs=5e-4)
    assert wh == pytest.approx(1.2992, abs=5e-4)
    om = solve_modal(apply_bc(build_element(cfg, 21, "hermite"), ss), 1).frequencies[0]
    assert om == pytest.approx(9.8810, rel=1e-4)


def test_dimension_mismatch():
    mw = modified_weights(lagrange_weights(gll_rule(7)))
    with pytest.raises(ValueError):
        assemble_lagrange(reference_preset(), mw, gll_rule(9))
    hd = hermite_derivative_matrices(hermite_basis(gll_rule(7)))
    with pytest.raises(ValueError):
        assemble_hermite(reference_preset(), hd, gll_rule(9))


@pytest.mark.parametrize("field,value", [("L", 0.0), ("E", -1.0), ("I", float("nan")), ("rho", 0.0), ("g1", -0.1)])
def test_config_validation(field, value):
    with pytest.raises(ValueError):
        BeamConfig(**{field: value})


def test_oracle_ratio_check():
    BeamConfig(g1=0.015, g2=0.01).check_oracle_ratio()
    with pytest.raises(ValueError):
        BeamConfig(g1=0.014, g2=0.01).check_oracle_ratio()
