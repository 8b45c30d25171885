import numpy as np
import pytest
from numpy.polynomial import legendre as leg

from sgbeam.gll import gll_rule
from sgbeam.hermite import hermite_basis, hermite_derivative_matrices, lagrange_basis_derivatives
from sgbeam.lagrange import DofLayout


def functionals(n, values):
    """Apply the N+6 interpolation functionals, in DOF order, to ``values(x, k)``."""
    x = gll_rule(n).nodes
    rows = [values(x, 0)]
    for k in (1, 2, 3):
        rows.append(values(np.array([-1.0, 1.0]), k))
    return np.vstack(rows)


def confluent_oracle(n):
    """Basis built by solving the interpolation conditions in a Legendre basis."""
    deg = n + 5
    eye = np.eye(deg + 1)

    def legendre_values(x, k):
        return np.column_stack([leg.legval(x, leg.legder(eye[c], k) if k else eye[c]) for c in range(deg + 1)])

    conditions = functionals(n, legendre_values)
    coeffs = np.linalg.solve(conditions, np.eye(deg + 1))
    x = gll_rule(n).nodes
    return {k: legendre_values(x, k) @ coeffs for k in (1, 2, 3, 4)}


def monomial_ext(m, n):
    x = gll_rule(n).nodes

    def d(xx, k):
        if k > m:
            return np.zeros_like(xx)
        return np.prod(np.arange(m - k + 1, m + 1)) * xx ** (m - k)

    ext = np.concatenate([d(x, 0), d(np.array([-1.0, 1.0]), 1), d(np.array([-1.0, 1.0]), 2), d(np.array([-1.0, 1.0]), 3)])
    return ext, d


@pytest.mark.parametrize("n", [4, 5, 7, 9, 11, 15])
def test_matches_confluent_oracle(n):
    hd = hermite_derivative_matrices(hermite_basis(gll_rule(n)))
    ref = confluent_oracle(n)
    for k in (1, 2, 3, 4):
        np.testing.assert_allclose(hd.order(k), ref[k], atol=1e-8 * np.abs(ref[k]).max())


@pytest.mark.parametrize("n", [4, 5, 7, 11, 16])
def test_kronecker_property(n):
    b = hermite_basis(gll_rule(n))
    mat = functionals(n, lambda x, k: b.evaluate(x, k))
    np.testing.assert_allclose(mat, np.eye(n + 6), atol=1e-10)


@pytest.mark.parametrize("n", [21, 31])
def test_kronecker_property_scaled(n):
    # third-derivative entries reach ~1e7 here, so 1e-10 is applied relative
    # to the size of the derivative values at the nodes
    b = hermite_basis(gll_rule(n))
    hd = hermite_derivative_matrices(b)
    mat = functionals(n, lambda x, k: b.evaluate(x, k))
    err = np.abs(mat - np.eye(n + 6))
    np.testing.assert_array_less(err[:n], 1e-10)
    for k in (1, 2, 3):
        rows = err[n + 2 * (k - 1): n + 2 * k]
        assert rows.max() <= 1e-10 * np.abs(hd.order(k)).max()


@pytest.mark.parametrize("n", [5, 9, 13])
def test_triple_derivative_function(n):
    b = hermite_basis(gll_rule(n))
    col = DofLayout(n).derivative(3, "left")
    ends = np.array([-1.0, 1.0])
    np.testing.assert_allclose(b.evaluate(b.grid.nodes, 0)[:, col], 0.0, atol=1e-12)
    for k in (1, 2):
        np.testing.assert_allclose(b.evaluate(ends, k)[:, col], 0.0, atol=1e-12)
    np.testing.assert_allclose(b.evaluate(ends, 3)[:, col], [1.0, 0.0], atol=1e-12)


def monomial_errors(n):
    """Worst normwise and value-relative errors of G_k on x**m, m <= n+5, k <= 4."""
    hd = hermite_derivative_matrices(hermite_basis(gll_rule(n)))
    x = gll_rule(n).nodes
    normwise = value = 0.0
    for m in range(n + 6):
        ext, d = monomial_ext(m, n)
        for k in (1, 2, 3, 4):
            g = hd.order(k)
            err = np.abs(g @ ext - d(x, k)).max()
            normwise = max(normwise, err / (np.abs(g).sum(axis=1).max() * np.abs(ext).max()))
            value = max(value, err / max(np.abs(d(x, k)).max(), 1.0))
    return normwise, value


@pytest.mark.parametrize("n", range(4, 22))
def test_monomial_exactness_normwise(n):
    assert monomial_errors(n)[0] <= 1e-7


@pytest.mark.parametrize("n", range(4, 12))
def test_monomial_exactness_value_relative(n):
    assert monomial_errors(n)[1] <= 1e-7


def test_interpolates_degree_twelve_at_seven_nodes():
    b = hermite_basis(gll_rule(7))
    ext, _ = monomial_ext(12, 7)
    assert (b.evaluate(np.array([0.3])) @ ext)[0] == pytest.approx(0.3**12, abs=1e-8)


@pytest.mark.parametrize("n", [6, 11])
def test_reproduces_monomials_at_random_points(n):
    b = hermite_basis(gll_rule(n))
    pts = np.random.default_rng(1).uniform(-1, 1, 50)
    for m in range(n + 6):
        ext, _ = monomial_ext(m, n)
        np.testing.assert_allclose(b.evaluate(pts) @ ext, pts**m, atol=1e-8)


@pytest.mark.parametrize("n", [7, 12])
def test_derivatives_match_finite_differences(n):
    b = hermite_basis(gll_rule(n))
    hd = hermite_derivative_matrices(b)
    x = b.grid.nodes[1:-1]
    h = 1e-3
    for k in (1, 2, 3, 4):
        f = lambda t: b.evaluate(t, k - 1)
        # fourth-order central difference
        fd = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)
        exact = hd.order(k)[1:-1]
        assert np.abs(fd - exact).max() <= 1e-6 * np.abs(exact).max()
        np.testing.assert_allclose(b.evaluate(x, k), exact, atol=1e-10 * np.abs(exact).max())


@pytest.mark.parametrize("n", [5, 10, 17])
def test_constant_and_linear_fields(n):
    hd = hermite_derivative_matrices(hermite_basis(gll_rule(n)))
    lay = DofLayout(n)
    const = np.zeros(n + 6)
    const[:n] = 1.0
    for k in (1, 2, 3, 4):
        np.testing.assert_allclose(hd.order(k) @ const, 0.0, atol=1e-9 * np.abs(hd.order(k)).max())
    lin = np.zeros(n + 6)
    lin[:n] = gll_rule(n).nodes
    lin[lay.derivative(1, "left")] = lin[lay.derivative(1, "right")] = 1.0
    np.testing.assert_allclose(hd.G1 @ lin, 1.0, atol=1e-10)
    np.testing.assert_allclose(hd.G2 @ lin, 0.0, atol=1e-9 * np.abs(hd.G2).max())


def test_sixth_power_fourth_derivative_nine_nodes():
    hd = hermite_derivative_matrices(hermite_basis(gll_rule(9)))
    ext, _ = monomial_ext(6, 9)
    x = gll_rule(9).nodes
    np.testing.assert_allclose(hd.G4 @ ext, 360 * x**2, atol=1e-7)


def test_lagrange_product_derivatives_match_dq_weights():
    from sgbeam.lagrange import lagrange_weights

    g = gll_rule(9)
    w = lagrange_weights(g)
    vals = lagrange_basis_derivatives(g.nodes, g.nodes, 4)
    np.testing.assert_allclose(vals[0], np.eye(9), atol=1e-13)
    for k in (1, 2, 3, 4):
        np.testing.assert_allclose(vals[k], w.order(k), atol=1e-9 * np.abs(w.order(k)).max())


@pytest.mark.parametrize("n", [4, 9, 20])
def test_closed_form_coefficients_match_taylor_form(n):
    b = hermite_basis(gll_rule(n))
    x = b.grid.nodes
    lay = DofLayout(n)
    for side, (j, end) in enumerate(((0, "left"), (n - 1, "right"))):
        for order, name in enumerate(("displacement", "slope", "curvature")):
            a, bb, c, d = b.coeffs[name][side]
            monomial = np.polynomial.Polynomial([d, c, bb, a])
            taylor = b.factors[lay.dof(order, end)][1]
            pts = np.linspace(-1, 1, 7)
            scale = np.abs([a, bb, c, d]).max()
            np.testing.assert_allclose(monomial(pts), taylor(pts), atol=1e-12 * scale)


def test_rejects_small_or_degenerate_grid():
    with pytest.raises(ValueError):
        hermite_basis(gll_rule(3))
