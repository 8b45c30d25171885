import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgbeam.gll import gll_rule
from sgbeam.lagrange import DofLayout, lagrange_weights, modified_weights


def extended(p, x):
    """Nodal values plus end derivatives of the polynomial ``p``."""
    d = [p.deriv(k) for k in (1, 2, 3)]
    return np.concatenate([p(x), [d[0](x[0]), d[0](x[-1]), d[1](x[0]), d[1](x[-1]), d[2](x[0]), d[2](x[-1])]])


def op_scale(a, k):
    """Normwise scale of the k-th power of a first-derivative matrix.

    The derivative values can be many orders smaller than the matrix
    entries, so errors are measured against ``||A||_inf**k ||p||_inf``.
    """
    return np.abs(a).sum(axis=1).max() ** k


def test_two_node_matrices():
    w = lagrange_weights(gll_rule(2))
    np.testing.assert_allclose(w.A, [[-0.5, 0.5], [-0.5, 0.5]], atol=1e-15)
    np.testing.assert_allclose(w.B, np.zeros((2, 2)), atol=1e-15)


def test_quintic_derivative_at_seven_nodes():
    g = gll_rule(7)
    w = lagrange_weights(g)
    np.testing.assert_allclose(w.A @ g.nodes**5, 5 * g.nodes**4, atol=1e-10)


@pytest.mark.parametrize("n", [3, 5, 8, 13, 21, 31])
def test_row_sums_and_products(n):
    w = lagrange_weights(gll_rule(n))
    for k in (1, 2, 3, 4):
        mat = w.order(k)
        assert np.max(np.abs(mat.sum(axis=1))) <= 1e-10 * n * np.max(np.abs(mat))
    np.testing.assert_array_equal(w.B, w.A @ w.A)
    np.testing.assert_array_equal(w.C, w.B @ w.A)
    np.testing.assert_array_equal(w.D, w.B @ w.B)


@given(st.integers(min_value=4, max_value=25), st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_differentiation_exactness(n, seed):
    g = gll_rule(n)
    w = lagrange_weights(g)
    p = np.polynomial.Legendre(np.random.default_rng(seed).normal(size=n))
    vals = p(g.nodes)
    for k in (1, 2, 3, 4):
        err = np.max(np.abs(w.order(k) @ vals - p.deriv(k)(g.nodes)))
        assert err <= 1e-9 * op_scale(w.A, k) * np.abs(vals).max()


def test_dof_layout():
    lay = DofLayout(9)
    assert lay.size == 15
    idx = [lay.displacement(i) for i in range(9)] + [
        lay.derivative(o, e) for o in (1, 2, 3) for e in ("left", "right")
    ]
    assert sorted(idx) == list(range(15))
    assert lay.dof(0, "right") == 8
    assert lay.derivative(3, "right") == 14
    with pytest.raises(ValueError):
        lay.derivative(4, "left")


@pytest.mark.parametrize("rows", ["recursive", "printed"])
@pytest.mark.parametrize("n", [5, 9, 14])
def test_modified_structure(rows, n):
    w = lagrange_weights(gll_rule(n))
    m = modified_weights(w, boundary_rows=rows)
    lay = m.dof_layout
    assert m.Abar.shape == (n, n + 6)
    np.testing.assert_array_equal(m.Abar[:, n:], 0.0)
    np.testing.assert_array_equal(m.Abar[:, :n], w.A)
    inner = slice(1, n - 1)
    for k, full in ((2, w.B), (3, w.C), (4, w.D)):
        mat = m.order(k)
        np.testing.assert_array_equal(mat[inner, :n], full[inner])
        np.testing.assert_array_equal(mat[inner, n:], 0.0)
    # boundary rows checked entry by entry against the summation formulas
    for i in (0, n - 1):
        for j in range(n):
            bsum = sum(w.A[i, k] * w.A[k, j] for k in range(1, n - 1))
            assert m.Bbar[i, j] == pytest.approx(bsum, rel=1e-12, abs=1e-12 * np.abs(w.B).max())
        assert m.Bbar[i, lay.derivative(1, "left")] == w.A[i, 0]
        assert m.Bbar[i, lay.derivative(1, "right")] == w.A[i, n - 1]
        assert m.Cbar[i, lay.derivative(2, "left")] == w.A[i, 0]
        assert m.Cbar[i, lay.derivative(2, "right")] == w.A[i, n - 1]
        assert m.Dbar[i, lay.derivative(3, "left")] == w.A[i, 0]
        assert m.Dbar[i, lay.derivative(3, "right")] == w.A[i, n - 1]
        if rows == "printed":
            for j in range(n):
                csum = sum(w.B[i, k] * w.A[k, j] for k in range(1, n - 1))
                dsum = sum(w.B[i, k] * w.B[k, j] for k in range(1, n - 1))
                scale_c, scale_d = np.abs(w.C).max(), np.abs(w.D).max()
                assert m.Cbar[i, j] == pytest.approx(csum, abs=1e-12 * scale_c)
                assert m.Dbar[i, j] == pytest.approx(dsum, abs=1e-12 * scale_d)
        else:
            for j in range(n):
                csum = sum(w.A[i, k] * w.B[k, j] for k in range(1, n - 1))
                dsum = sum(w.A[i, k] * w.C[k, j] for k in range(1, n - 1))
                assert m.Cbar[i, j] == pytest.approx(csum, abs=1e-12 * np.abs(w.C).max())
                assert m.Dbar[i, j] == pytest.approx(dsum, abs=1e-12 * np.abs(w.D).max())


def test_bbar_spot_entries_five_nodes():
    w = lagrange_weights(gll_rule(5))
    m = modified_weights(w)
    assert m.Bbar[0, 5] == w.A[0, 0]
    assert m.Bbar[0, 6] == w.A[0, 4]


def test_cubic_interior_rows_nine_nodes():
    g = gll_rule(9)
    m = modified_weights(lagrange_weights(g))
    v = extended(np.polynomial.Polynomial([0, 0, 0, 1]), g.nodes)
    np.testing.assert_allclose((m.Bbar @ v)[1:-1], 6 * g.nodes[1:-1], atol=1e-9)


@pytest.mark.parametrize("n", [5, 7, 11, 17, 21])
def test_recursive_rows_are_exact(n):
    g = gll_rule(n)
    m = modified_weights(lagrange_weights(g), boundary_rows="recursive")
    p = np.polynomial.Legendre(np.random.default_rng(n).normal(size=n))
    v = extended(p, g.nodes)
    for k in (1, 2, 3, 4):
        err = np.max(np.abs(m.order(k) @ v - p.deriv(k)(g.nodes)))
        assert err <= 1e-9 * op_scale(m.Abar[:, :n], k) * np.abs(v).max()


def test_printed_rows_are_not_exact_at_boundary():
    g = gll_rule(7)
    m = modified_weights(lagrange_weights(g), boundary_rows="printed")
    p = np.polynomial.Polynomial([0, 0, 0, 0, 0, 1.0])
    v = extended(p, g.nodes)
    assert abs((m.Cbar @ v)[0] - p.deriv(3)(-1.0)) > 1.0


def test_rejects_unknown_boundary_rows():
    with pytest.raises(ValueError):
        modified_weights(lagrange_weights(gll_rule(5)), boundary_rows="other")
