import math

import numpy as np
import pytest

from sgpca import FactorModel, MaskedMatrix, get_family, grad_theta, gradients, masked_nll, theta
from sgpca.data import read_csv

from conftest import random_data, random_model


def test_theta_intercept_broadcast():
    m = FactorModel(np.array([1.0, 2.0]), np.zeros((2, 1)), np.zeros((2, 1)))
    np.testing.assert_array_equal(theta(m), [[1, 2], [1, 2]])
    z = FactorModel(np.zeros(3), np.zeros((4, 2)), np.zeros((3, 2)))
    assert not np.any(z.theta())


def test_theta_matches_triple_loop(rng):
    n, p = 5, 4
    m = random_model(rng, n, p, min(n, p))
    expected = np.empty((n, p))
    for i in range(n):
        for j in range(p):
            acc = m.alpha[j]
            for k in range(m.r):
                acc += m.V[i, k] * m.S[j, k]
            expected[i, j] = acc
    assert np.max(np.abs(theta(m) - expected)) <= 1e-12


def test_factor_model_shape_checks():
    with pytest.raises(ValueError):
        FactorModel(np.zeros(3), np.zeros((4, 2)), np.zeros((3, 1)))
    with pytest.raises(ValueError):
        FactorModel(np.zeros(2), np.zeros((4, 1)), np.zeros((3, 1)))


def test_sign_normalization():
    V = np.eye(3)[:, :2]
    S = np.array([[1.0, 0.2], [-3.0, 0.1], [0.0, -0.5]])
    m = FactorModel(np.zeros(3), V, S).sign_normalized()
    assert m.S[1, 0] == 3.0 and m.S[2, 1] == 0.5
    np.testing.assert_allclose(m.theta(), FactorModel(np.zeros(3), V, S).theta())


def test_masked_storage_is_canonical():
    d = MaskedMatrix([[1.0, np.nan], [3.0, 4.0]])
    np.testing.assert_array_equal(d.values, [[1, 0], [3, 4]])
    np.testing.assert_array_equal(d.mask, [[1, 0], [1, 1]])
    d2 = MaskedMatrix([[1.0, 9.0]], mask=[[1, 0]])
    assert d2.values[0, 1] == 0
    with pytest.raises(ValueError):
        d.values[0, 0] = 5.0
    with pytest.raises(ValueError):
        MaskedMatrix([[1.0]], mask=[[2]])


def test_gaussian_loss_at_data():
    X = np.array([[1.0, -2.0], [0.5, 3.0]])
    d = MaskedMatrix(X)
    assert masked_nll(d, get_family("gaussian"), X) == pytest.approx(-0.5 * np.sum(X**2))


def test_all_masked_loss_is_zero(rng):
    d = MaskedMatrix(rng.standard_normal((3, 4)), mask=np.zeros((3, 4)))
    for name in ("gaussian", "bernoulli", "poisson"):
        assert masked_nll(d, get_family(name), rng.standard_normal((3, 4)) * 50) == 0.0


def test_bernoulli_single_cell():
    d = MaskedMatrix([[1.0]])
    assert masked_nll(d, get_family("bernoulli"), [[0.0]]) == pytest.approx(math.log(2))
    d0 = MaskedMatrix([[0.0]])
    assert grad_theta(d0, get_family("bernoulli"), [[0.0]])[0, 0] == 0.5


def test_grad_theta_zero_where_masked(rng):
    d = MaskedMatrix([[1.0, np.nan]])
    g = grad_theta(d, get_family("poisson"), [[0.0, 500.0]])
    assert g[0, 1] == 0.0 and g[0, 0] == 0.0


def test_gaussian_gradients_vanish_at_exact_fit(rng):
    m = random_model(rng, 6, 5, 2)
    d = MaskedMatrix(m.theta())
    for G in gradients(d, get_family("gaussian"), m):
        assert np.max(np.abs(G)) <= 1e-12
    empty = MaskedMatrix(rng.standard_normal((6, 5)), mask=np.zeros((6, 5)))
    for G in gradients(empty, get_family("bernoulli"), m):
        assert not np.any(G)


def test_gaussian_loss_is_squared_error(rng):
    X = rng.standard_normal((7, 4))
    T = rng.standard_normal((7, 4))
    lhs = masked_nll(MaskedMatrix(X), get_family("gaussian"), T) + 0.5 * np.sum(X**2)
    assert lhs == pytest.approx(0.5 * np.sum((X - T) ** 2), abs=1e-10)


def test_gamma_masked_cells_outside_domain_are_ignored():
    d = MaskedMatrix([[1.0, np.nan]])
    fam = get_family("gamma")
    assert np.isfinite(masked_nll(d, fam, [[-1.0, 3.0]]))
    assert grad_theta(d, fam, [[-1.0, 3.0]])[0, 1] == 0.0


def test_masked_perturbation_changes_nothing(rng):
    X = rng.standard_normal((5, 6))
    mask = rng.random((5, 6)) > 0.3
    Y = X.copy()
    Y[~mask] = rng.standard_normal(np.sum(~mask)) * 100
    a, b = MaskedMatrix(X, mask), MaskedMatrix(Y, mask)
    m = random_model(rng, 5, 6, 2)
    fam = get_family("gaussian")
    assert masked_nll(a, fam, m.theta()) == masked_nll(b, fam, m.theta())
    for ga, gb in zip(gradients(a, fam, m), gradients(b, fam, m)):
        np.testing.assert_array_equal(ga, gb)


def test_read_csv(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("a,b,c\n1,2,NA\n\n4, ,nan\n")
    d = read_csv(f, header=True)
    assert d.shape == (2, 3)
    np.testing.assert_array_equal(d.mask, [[1, 1, 0], [1, 0, 0]])
    assert d.values[1, 0] == 4.0
    f.write_text("1,2\n3\n")
    with pytest.raises(ValueError, match="row 2"):
        read_csv(f)
    f.write_text("1,x\n")
    with pytest.raises(ValueError, match="cannot parse"):
        read_csv(f)


def test_column_means_and_centering():
    d = MaskedMatrix([[1.0, np.nan], [3.0, np.nan]])
    np.testing.assert_array_equal(d.column_means(), [2.0, 0.0])
    c, means = d.centered()
    np.testing.assert_array_equal(c.values, [[-1, 0], [1, 0]])
    np.testing.assert_array_equal(c.mask, d.mask)


def test_take_columns_keeps_original_columns(rng):
    d = random_data(rng, "poisson", 4, 6, missing=0.2)
    sub = d.take_columns([1, 4])
    np.testing.assert_array_equal(sub.values, d.values[:, [1, 4]])
    np.testing.assert_array_equal(sub.mask, d.mask[:, [1, 4]])
