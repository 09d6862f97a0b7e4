"""Synthetic data from a spiked natural-parameter model ``Theta* = P D Q^T``.

``P`` has i.i.d. standard normal scores, ``D`` holds the signal strengths and
``Q`` is a sparse orthonormal loading matrix. Observations are drawn entrywise
from the family with natural parameter ``Theta*`` and cells are masked
independently at ``missing_rate``.

All randomness comes from named sub-streams of a single seed, so changing
one ingredient (say the mask rate) leaves the others untouched.
"""

from __future__ import annotations

import math
import warnings
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct

from .data import MaskedMatrix
from .family import Family, get_family
from .threshold import ELEMENT, GROUP

POISSON_THETA_CAP = 30.0

DEFAULT_LAMBDA = {"gaussian": 10.0, "bernoulli": 10.0, "poisson": 2.0}

# (r*, q*, mode); setting "a" uses 5% for Bernoulli
SETTINGS = {
    "a": (1, 0.01, ELEMENT),
    "b": (4, 0.08, ELEMENT),
    "c": (4, 0.20, GROUP),
}


def substream(seed: int, key: str) -> np.random.Generator:
    """Independent generator for the named component of a run."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(key.encode())]))


@dataclass(frozen=True)
class SimSpec:
    n: int
    p: int
    r_star: int
    q_star: float
    q_mode: str = ELEMENT
    family: str = "gaussian"
    #: diagonal of D; ``None`` picks the family default for every component
    lambdas: tuple[float, ...] | None = None
    missing_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError(f"dimensions must be positive, got n={self.n}, p={self.p}")
        if not 1 <= self.r_star <= min(self.n, self.p):
            raise ValueError(f"r_star must lie in [1, min(n, p)], got {self.r_star}")
        if not 0 < self.q_star <= 1:
            raise ValueError(f"q_star must lie in (0, 1], got {self.q_star}")
        if self.q_mode not in (ELEMENT, GROUP):
            raise ValueError(f"q_mode must be {ELEMENT!r} or {GROUP!r}")
        if not 0 <= self.missing_rate < 1:
            raise ValueError(f"missing_rate must lie in [0, 1), got {self.missing_rate}")
        if self.lambdas is not None:
            lam = tuple(float(v) for v in self.lambdas)
            if len(lam) != self.r_star:
                raise ValueError(f"need {self.r_star} signal strengths, got {len(lam)}")
            if min(lam) <= 0:
                raise ValueError("signal strengths must be positive")
            object.__setattr__(self, "lambdas", lam)
        name = get_family(self.family).name
        if name not in DEFAULT_LAMBDA:
            raise ValueError(f"simulation is not available for the {name} family")
        object.__setattr__(self, "family", name)

    def strengths(self) -> np.ndarray:
        if self.lambdas is not None:
            return np.array(self.lambdas)
        return np.full(self.r_star, DEFAULT_LAMBDA[self.family])


@dataclass
class SimTruth:
    theta: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    D: np.ndarray = field(repr=False)


def setting_spec(setting: str, family: str = "gaussian", *, n: int = 100, p: int = 200,
                 seed: int = 0, missing_rate: float = 0.0,
                 lambdas: tuple[float, ...] | None = None) -> SimSpec:
    """The three benchmark configurations ``a``, ``b`` and ``c`` at the given size."""
    try:
        r_star, q_star, mode = SETTINGS[setting]
    except KeyError:
        raise ValueError(f"unknown setting {setting!r}; choose from {', '.join(SETTINGS)}") from None
    family = get_family(family).name
    if setting == "a" and family == "bernoulli":
        q_star = 0.05
    return SimSpec(n=n, p=p, r_star=r_star, q_star=q_star, q_mode=mode, family=family,
                   lambdas=lambdas, missing_rate=missing_rate, seed=seed)


def generate_loadings(p: int, r_star: int, q_star: float, q_mode: str = ELEMENT,
                      seed: int = 0) -> np.ndarray:
    """Sparse ``p x r`` matrix with orthonormal columns.

    Only the support is random. Element mode spreads ``floor(q p r)``
    nonzeros over disjoint random index blocks, one block per column; a block
    holds magnitudes falling linearly from 1 to 1/2 before normalization, so
    loadings differ without any being negligible, and disjointness makes the
    columns orthogonal. Group mode picks ``floor(q p)`` random rows shared by
    all columns and fills them with the leading columns of the orthonormal
    DCT-II basis, whose constant first column keeps every chosen row nonzero.
    ``q = 1`` gives a dense orthonormal matrix from a seeded Gaussian.
    """
    if not 1 <= r_star <= p:
        raise ValueError(f"r_star must lie in [1, p], got {r_star}")
    if not 0 < q_star <= 1:
        raise ValueError(f"q_star must lie in (0, 1], got {q_star}")
    rng = substream(seed, "loadings")
    if q_star == 1:
        Q, _ = np.linalg.qr(rng.standard_normal((p, r_star)))
        return Q
    Q = np.zeros((p, r_star))
    if q_mode == GROUP:
        k = math.floor(q_star * p + 1e-9)
        if k < r_star:
            raise ValueError(f"{k} nonzero rows cannot hold {r_star} orthonormal columns")
        rows = np.sort(rng.permutation(p)[:k])
        Q[rows] = dct(np.eye(k), norm="ortho", axis=0).T[:, :r_star]
        return Q
    if q_mode != ELEMENT:
        raise ValueError(f"q_mode must be {ELEMENT!r} or {GROUP!r}, got {q_mode!r}")
    m = math.floor(q_star * p * r_star + 1e-9)
    if m < r_star:
        raise ValueError(f"{m} nonzeros cannot fill {r_star} orthonormal columns")
    if m > p:
        raise ValueError(f"{m} nonzeros do not fit in disjoint blocks of {p} rows")
    idx = rng.permutation(p)[:m]
    sizes = [m // r_star + (j < m % r_star) for j in range(r_star)]
    start = 0
    for j, size in enumerate(sizes):
        w = np.linspace(1.0, 0.5, size)
        Q[idx[start:start + size], j] = w / np.linalg.norm(w)
        start += size
    return Q


def generate_data(spec: SimSpec) -> tuple[MaskedMatrix, SimTruth]:
    family: Family = get_family(spec.family)
    Q = generate_loadings(spec.p, spec.r_star, spec.q_star, spec.q_mode, spec.seed)
    P = substream(spec.seed, "scores").standard_normal((spec.n, spec.r_star))
    D = np.diag(spec.strengths())
    theta = P @ D @ Q.T
    if family.name == "poisson" and theta.max() > POISSON_THETA_CAP:
        warnings.warn(
            f"clipping {int(np.sum(theta > POISSON_THETA_CAP))} natural parameters "
            f"at {POISSON_THETA_CAP} to avoid overflow",
            RuntimeWarning,
            stacklevel=2,
        )
        theta = np.minimum(theta, POISSON_THETA_CAP)
    X = family.sample(theta, substream(spec.seed, "noise"))
    mask = substream(spec.seed, "mask").random(X.shape) >= spec.missing_rate
    return MaskedMatrix(X, mask), SimTruth(theta=theta, Q=Q, P=P, D=D)
