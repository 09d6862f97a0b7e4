import numpy as np
import pytest

from sgpca import MaskedMatrix, get_family, masked_nll
from sgpca.metrics import (
    align_columns,
    deviance,
    evaluate,
    max_canonical_angle,
    selection_rates,
    theta_error,
    trimmed_mean,
)


def test_theta_error_examples(rng):
    T = rng.standard_normal((3, 4))
    assert theta_error(T, T) == 0.0
    assert theta_error(np.ones((2, 2)), np.zeros((2, 2))) == 1000.0
    R = rng.standard_normal((3, 4))
    assert theta_error(T + 2 * R, T) == pytest.approx(4 * theta_error(T + R, T))
    with pytest.raises(ValueError):
        theta_error(np.zeros((2, 2)), np.zeros((2, 3)))


def test_deviance_vanishes_at_saturated_fit(rng):
    X = rng.poisson(3.0, (5, 4)) + 1.0
    d = MaskedMatrix(X)
    assert deviance(d, "poisson", np.log(X)) == pytest.approx(0.0, abs=1e-10)
    B = MaskedMatrix(rng.integers(0, 2, (5, 4)).astype(float))
    assert deviance(B, "bernoulli", 40 * (2 * B.values - 1)) == pytest.approx(0.0, abs=1e-10)


def test_gaussian_deviance_is_residual_sum_of_squares(rng):
    X = rng.standard_normal((6, 5))
    mask = rng.random((6, 5)) > 0.3
    T = rng.standard_normal((6, 5))
    expected = np.sum(mask * (X - T) ** 2)
    assert deviance(MaskedMatrix(X, mask), "gaussian", T) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("family", ["gaussian", "bernoulli", "poisson"])
def test_deviance_nonnegative(family, rng):
    fam = get_family(family)
    d = MaskedMatrix(fam.sample(rng.standard_normal((8, 6)), rng), rng.random((8, 6)) > 0.2)
    for _ in range(20):
        assert deviance(d, fam, 3 * rng.standard_normal((8, 6))) >= -1e-10


def test_canonical_angle_examples():
    A = np.array([[1.0], [0.0]])
    assert max_canonical_angle(A, A) == pytest.approx(0.0, abs=1e-12)
    assert max_canonical_angle(A, np.array([[0.0], [1.0]])) == pytest.approx(90.0)
    E = np.eye(3)[:, :2]
    F = np.column_stack([[1.0, 0, 0], [0, 1 / np.sqrt(2), 1 / np.sqrt(2)]])
    assert max_canonical_angle(E, F) == pytest.approx(45.0)
    # tiny angles keep their precision
    G = np.array([[1.0], [1e-9]])
    assert max_canonical_angle(A, G) == pytest.approx(np.degrees(1e-9), rel=1e-6)
    with pytest.raises(ValueError):
        max_canonical_angle(np.zeros((3, 1)), E)


def test_selection_rate_examples():
    Q = np.array([[0.0, 1.0], [2.0, 0.0], [0.0, 0.0]])
    assert selection_rates(Q, Q) == (0.0, 0.0)
    assert selection_rates(np.zeros_like(Q), Q) == (1.0, 0.0)
    truth = np.array([[0.0], [1.0], [1.0], [0.0]])
    est = np.array([[0.0], [0.0], [1.0], [1.0]])
    assert selection_rates(est, truth) == (0.5, 0.5)
    rows_est = np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 3.0]])
    assert selection_rates(rows_est, Q, "group") == (0.5, 1.0)
    with pytest.raises(ValueError):
        selection_rates(Q, np.zeros_like(Q))


def test_element_rates_ignore_column_order():
    Q = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]])
    S = -Q[:, ::-1]
    np.testing.assert_array_equal(align_columns(S, Q), -Q)
    assert selection_rates(S, Q) == (0.0, 0.0)


def test_trimmed_mean_examples():
    assert trimmed_mean([1.0, 2.0, 6.0], 0) == 3.0
    assert trimmed_mean([0, 1, 2, 3, 100], 0.2) == 2.0
    assert trimmed_mean([4.5] * 7, 0.1) == 4.5
    with pytest.raises(ValueError):
        trimmed_mean([], 0.1)


def test_evaluate_bundle(rng):
    X = rng.standard_normal((5, 4))
    d = MaskedMatrix(X)
    Q = np.eye(4)[:, :1]
    res = evaluate(d, "gaussian", X, Q, X, Q)
    assert res.theta_error == 0 and res.deviance == pytest.approx(0, abs=1e-12)
    assert res.miss_rate == res.false_positive_rate == 0
    assert res.deviance_ratio == 1.0
    assert set(res.as_dict()) >= {"theta_error", "max_canonical_angle_deg"}
    ref = evaluate(d, "gaussian", X + 1, Q, X, Q)
    assert evaluate(d, "gaussian", X + 1, Q, X, Q, reference_deviance=ref.deviance).deviance_ratio == 1.0
