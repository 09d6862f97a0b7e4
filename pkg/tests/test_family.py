import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgpca.family import FAMILIES, DomainError, ExponentialGamma, get_family


def domain_sample(fam, rng, size):
    theta = rng.uniform(-6, 6, size)
    if fam.name == "gamma":
        theta = -np.exp(rng.uniform(-3, 3, size))
    return theta


@pytest.mark.parametrize(
    "name, mu, expected",
    [("gaussian", 2.0, 2.0), ("bernoulli", 0.5, 0.0), ("poisson", 1.0, 0.0), ("gamma", 2.0, -0.5)],
)
def test_link_values(name, mu, expected):
    out = get_family(name).link(np.array([[mu]]))
    assert out.shape == (1, 1) and out[0, 0] == pytest.approx(expected)


@pytest.mark.parametrize(
    "name, theta, expected",
    [("bernoulli", 0.0, 0.5), ("poisson", 1.0, math.e), ("gamma", -2.0, 0.5), ("gaussian", -3.0, -3.0)],
)
def test_inv_link_values(name, theta, expected):
    assert get_family(name).inv_link(np.array([[theta]]))[0, 0] == pytest.approx(expected, rel=1e-15)


def test_log_partition_values():
    assert get_family("gaussian").log_partition(np.array([[3.0]]))[0, 0] == 4.5
    assert get_family("bernoulli").log_partition(np.array([[0.0]]))[0, 0] == pytest.approx(math.log(2))
    big = get_family("bernoulli").log_partition(np.array([[40.0]]))[0, 0]
    assert abs(big - 40.0) <= 1e-12
    # no overflow far out in either tail
    tails = get_family("bernoulli").log_partition(np.array([-800.0, 800.0]))
    assert tails[0] == pytest.approx(0.0, abs=1e-300) and tails[1] == 800.0


def test_curvature_values():
    assert np.all(get_family("gaussian").curvature(np.linspace(-5, 5, 7)) == 1.0)
    assert get_family("bernoulli").curvature(np.array([[0.0]]))[0, 0] == 0.25
    assert get_family("poisson").curvature(np.array([[0.0]]))[0, 0] == 1.0
    assert get_family("gamma").curvature(np.array([-0.5]))[0] == pytest.approx(4.0)


def test_universal_steps():
    assert get_family("gaussian").universal_step() == 1.0
    assert get_family("bernoulli").universal_step() == 4.0
    assert get_family("poisson").universal_step() is None
    assert get_family("gamma").universal_step() is None


@pytest.mark.parametrize("name", list(FAMILIES))
def test_link_inverts_inv_link(name, rng):
    fam = get_family(name)
    theta = domain_sample(fam, rng, 1000)
    assert np.max(np.abs(fam.link(fam.inv_link(theta)) - theta)) <= 1e-10


@pytest.mark.parametrize("name", list(FAMILIES))
def test_derivatives_match_finite_differences(name, rng):
    fam = get_family(name)
    theta = domain_sample(fam, rng, 200)
    h = 1e-5
    if name == "gamma":
        h = 1e-5 * np.abs(theta)
    fd1 = (fam.log_partition(theta + h) - fam.log_partition(theta - h)) / (2 * h)
    fd2 = (fam.inv_link(theta + h) - fam.inv_link(theta - h)) / (2 * h)
    d1, d2 = fam.inv_link(theta), fam.curvature(theta)
    assert np.max(np.abs(fd1 - d1) / np.maximum(np.abs(d1), 1e-3)) <= 1e-5
    assert np.max(np.abs(fd2 - d2) / np.maximum(np.abs(d2), 1e-3)) <= 1e-4
    assert np.all(d2 > 0)


@pytest.mark.parametrize("name", ["gaussian", "bernoulli"])
def test_curvature_never_exceeds_bound(name, rng):
    fam = get_family(name)
    theta = rng.uniform(-50, 50, 10_000)
    assert np.max(fam.curvature(theta)) <= fam.curvature_bound


def test_bernoulli_curvature_peaks_at_quarter():
    # the closed form 1 / (e^t + e^-t + 2), not the variant that peaks at 1/3
    theta = np.linspace(-3, 3, 61)
    expected = 1.0 / (np.exp(theta) + np.exp(-theta) + 2.0)
    np.testing.assert_allclose(get_family("bernoulli").curvature(theta), expected, rtol=1e-13)


def test_domain_errors_name_the_index():
    gamma = ExponentialGamma()
    with pytest.raises(DomainError, match=r"\(1, 0\)"):
        gamma.inv_link(np.array([[-1.0, -2.0], [0.5, -1.0]]))
    with pytest.raises(DomainError):
        get_family("bernoulli").link(np.array([[1.0]]))
    with pytest.raises(DomainError):
        get_family("poisson").link(np.array([0.0]))
    assert not gamma.in_domain(np.array([0.0]))
    assert gamma.in_domain(np.array([-1e-9]))


def test_check_data_respects_mask():
    pois = get_family("poisson")
    values = np.array([[1.0, 2.5], [0.0, 3.0]])
    with pytest.raises(DomainError, match=r"\(0, 1\)"):
        pois.check_data(values)
    pois.check_data(values, observed=np.array([[True, False], [True, True]]))
    with pytest.raises(DomainError, match="not in"):
        get_family("bernoulli").check_data(np.array([[0.0, 2.0]]))


def test_saturated_limits():
    np.testing.assert_array_equal(get_family("bernoulli").saturated_nll(np.array([0.0, 1.0])), [0, 0])
    assert get_family("poisson").saturated_nll(np.array([0.0]))[0] == 0.0
    x = np.array([3.0])
    assert get_family("poisson").saturated_nll(x)[0] == pytest.approx(-3 * math.log(3) + 3)
    assert get_family("gaussian").saturated_nll(x)[0] == pytest.approx(-4.5)


def test_get_family_lookup():
    assert get_family("Gaussian") == get_family("gaussian")
    fam = get_family("poisson")
    assert get_family(fam) is fam
    with pytest.raises(ValueError, match="unknown family"):
        get_family("cauchy")


@settings(max_examples=200, deadline=None)
@given(st.floats(-700, 700))
def test_bernoulli_log_partition_is_softplus(t):
    val = get_family("bernoulli").log_partition(np.array([t]))[0]
    assert np.isfinite(val)
    assert val == pytest.approx(np.logaddexp(0.0, t), rel=1e-12, abs=1e-300)
