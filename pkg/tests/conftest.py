import numpy as np
import pytest

from sgpca import FactorModel, MaskedMatrix, get_family


def random_model(rng, n, p, r, alpha_scale=1.0):
    V, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return FactorModel(alpha_scale * rng.standard_normal(p), V, rng.standard_normal((p, r)))


def random_data(rng, family, n, p, missing=0.0, theta=None):
    """Observations drawn from ``family`` at natural parameter ``theta`` (default N(0, 1))."""
    fam = get_family(family)
    if theta is None:
        theta = rng.standard_normal((n, p))
        if fam.name == "gamma":
            theta = -np.exp(0.3 * theta)
    X = fam.sample(theta, rng)
    mask = rng.random((n, p)) >= missing
    return MaskedMatrix(X, mask)


def svd_optimum(X, r):
    """Masked Gaussian loss of the best rank-r-plus-intercept fit to a complete X."""
    Xc = X - X.mean(axis=0)
    s = np.linalg.svd(Xc, compute_uv=False)
    return 0.5 * np.sum(s[r:] ** 2) - 0.5 * np.sum(X**2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion and print it at the end."""

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
