"""Exponential-family descriptors under the canonical link.

Each family bundles the link ``g``, its inverse ``b'``, the log-partition
function ``b`` and its curvature ``b''``, all applied element-wise to
arrays of natural parameters.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit, log_expit


class DomainError(ValueError):
    """An entry lies outside the domain of a family function."""


def _first_bad(bad: np.ndarray) -> tuple:
    return tuple(int(i) for i in np.argwhere(bad)[0])


class Family:
    """Base class; subclasses fill in the element-wise functions."""

    name: str = ""
    #: sup of b'' over the natural-parameter domain (``inf`` if unbounded)
    curvature_bound: float = math.inf
    #: natural parameters are confined to a proper subset of the real line
    restricted_domain: bool = False

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"

    def __eq__(self, other: object) -> bool:
        return type(self) is type(other)

    def __hash__(self) -> int:
        return hash(type(self))

    @property
    def dispersion(self) -> float:
        return 1.0

    # domain checks -------------------------------------------------------

    def _check_mean(self, mu: np.ndarray) -> None:
        pass

    def _check_theta(self, theta: np.ndarray) -> None:
        pass

    def check_data(self, values: np.ndarray, observed: np.ndarray | None = None) -> None:
        """Raise ``DomainError`` if ``values`` fall outside the support.

        Only cells where ``observed`` is true are checked; the error names the
        first offending index.
        """
        values = np.asarray(values, dtype=float)
        keep = np.ones(values.shape, dtype=bool) if observed is None else np.asarray(observed, bool)
        with np.errstate(invalid="ignore"):
            for bad, what in self._data_violations(values):
                bad = bad & keep
                if bad.any():
                    raise DomainError(f"{what} at index {_first_bad(bad)}")

    def _data_violations(self, values):
        yield ~np.isfinite(values), "non-finite observation"

    def in_domain(self, theta: np.ndarray) -> bool:
        try:
            self._check_theta(np.asarray(theta))
        except DomainError:
            return False
        return True

    # element-wise functions ---------------------------------------------

    def link(self, mu):
        mu = np.asarray(mu, dtype=float)
        self._check_mean(mu)
        return self._link(mu)

    def inv_link(self, theta):
        theta = np.asarray(theta, dtype=float)
        self._check_theta(theta)
        return self._inv_link(theta)

    def log_partition(self, theta):
        theta = np.asarray(theta, dtype=float)
        self._check_theta(theta)
        return self._log_partition(theta)

    def curvature(self, theta):
        theta = np.asarray(theta, dtype=float)
        self._check_theta(theta)
        return self._curvature(theta)

    def universal_step(self) -> float | None:
        """Step size that guarantees descent for every iterate, if one exists."""
        if math.isinf(self.curvature_bound):
            return None
        return 1.0 / self.curvature_bound

    def saturated_nll(self, x):
        """Per-cell ``-x g(x) + b(g(x))``, with the finite limit at boundary values."""
        x = np.asarray(x, dtype=float)
        return -x * self.link(x) + self.log_partition(self.link(x))

    def sample(self, theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError(f"sampling is not available for {self.name}")

    # subclass hooks
    def _link(self, mu):
        raise NotImplementedError

    def _inv_link(self, theta):
        raise NotImplementedError

    def _log_partition(self, theta):
        raise NotImplementedError

    def _curvature(self, theta):
        raise NotImplementedError


class Gaussian(Family):
    name = "gaussian"
    curvature_bound = 1.0

    def _link(self, mu):
        return mu.copy()

    def _inv_link(self, theta):
        return theta.copy()

    def _log_partition(self, theta):
        return 0.5 * theta**2

    def _curvature(self, theta):
        return np.ones_like(theta)

    def sample(self, theta, rng):
        return theta + rng.standard_normal(theta.shape)


class Bernoulli(Family):
    name = "bernoulli"
    curvature_bound = 0.25

    def _check_mean(self, mu):
        bad = ~((mu > 0) & (mu < 1))
        if bad.any():
            raise DomainError(f"Bernoulli mean outside (0, 1) at index {_first_bad(bad)}")

    def _data_violations(self, values):
        yield from super()._data_violations(values)
        yield (values != 0) & (values != 1), "Bernoulli observation not in {0, 1}"

    def _link(self, mu):
        return np.log(mu) - np.log1p(-mu)

    def _inv_link(self, theta):
        return expit(theta)

    def _log_partition(self, theta):
        # log(1 + e^t) = -log(sigmoid(-t)), stable in both tails
        return -log_expit(-theta)

    def _curvature(self, theta):
        # b'(1 - b') peaks at 1/4; the tabulated 1/(e^t + e^-t + 1) would peak at 1/3
        return expit(theta) * expit(-theta)

    def saturated_nll(self, x):
        x = np.asarray(x, dtype=float)
        self.check_data(x)
        return np.zeros_like(x)

    def sample(self, theta, rng):
        return (rng.random(theta.shape) < expit(theta)).astype(float)


class Poisson(Family):
    name = "poisson"

    def _check_mean(self, mu):
        bad = ~(mu > 0)
        if bad.any():
            raise DomainError(f"Poisson mean not positive at index {_first_bad(bad)}")

    def _data_violations(self, values):
        yield from super()._data_violations(values)
        yield (values < 0) | (values != np.floor(values)), "Poisson observation not a nonnegative integer"

    def _link(self, mu):
        return np.log(mu)

    def _inv_link(self, theta):
        with np.errstate(over="ignore"):
            return np.exp(theta)

    def _log_partition(self, theta):
        with np.errstate(over="ignore"):
            return np.exp(theta)

    def _curvature(self, theta):
        with np.errstate(over="ignore"):
            return np.exp(theta)

    def saturated_nll(self, x):
        x = np.asarray(x, dtype=float)
        self.check_data(x)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = -x[pos] * np.log(x[pos]) + x[pos]
        return out

    def sample(self, theta, rng):
        return rng.poisson(np.exp(theta)).astype(float)


class ExponentialGamma(Family):
    """Exponential/Gamma family with unit shape; natural parameters are negative."""

    name = "gamma"
    restricted_domain = True

    def _check_mean(self, mu):
        bad = ~(mu > 0)
        if bad.any():
            raise DomainError(f"gamma mean not positive at index {_first_bad(bad)}")

    def _check_theta(self, theta):
        bad = ~(theta < 0)
        if bad.any():
            raise DomainError(
                f"gamma natural parameter must be negative; violated at index {_first_bad(bad)}"
            )

    def _data_violations(self, values):
        yield from super()._data_violations(values)
        yield ~(values > 0), "gamma observation not positive"

    def _link(self, mu):
        return -1.0 / mu

    def _inv_link(self, theta):
        return -1.0 / theta

    def _log_partition(self, theta):
        return -np.log(-theta)

    def _curvature(self, theta):
        return 1.0 / theta**2

    def sample(self, theta, rng):
        return rng.exponential(-1.0 / theta)


FAMILIES = {
    "gaussian": Gaussian,
    "bernoulli": Bernoulli,
    "poisson": Poisson,
    "gamma": ExponentialGamma,
}


def get_family(family: str | Family) -> Family:
    """Resolve a family name (``gaussian``, ``bernoulli``, ``poisson``, ``gamma``)."""
    if isinstance(family, Family):
        return family
    try:
        return FAMILIES[family.lower()]()
    except KeyError:
        raise ValueError(
            f"unknown family {family!r}; choose from {', '.join(FAMILIES)}"
        ) from None
