"""Evaluation metrics: parameter error, deviance, subspace angle and support recovery."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import orth
from scipy.stats import trim_mean

from .data import MaskedMatrix, masked_nll
from .family import get_family
from .threshold import ELEMENT, GROUP


@dataclass(frozen=True)
class EvalResult:
    theta_error: float
    deviance: float
    deviance_ratio: float
    max_canonical_angle_deg: float
    miss_rate: float
    false_positive_rate: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def theta_error(theta_hat, theta_star) -> float:
    """``1000 ||Theta_hat - Theta*||_F^2 / (n p)``."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    if theta_hat.shape != theta_star.shape:
        raise ValueError(f"shape mismatch: {theta_hat.shape} vs {theta_star.shape}")
    return 1000.0 * float(np.sum((theta_hat - theta_star) ** 2)) / theta_hat.size


def deviance(data: MaskedMatrix, family, theta_hat) -> float:
    """Twice the masked log-likelihood gap to the saturated model.

    Cells where the saturated natural parameter is infinite (0/1 for
    Bernoulli, 0 for Poisson) use the finite limit of their contribution.
    """
    family = get_family(family)
    saturated = float(np.sum(family.saturated_nll(data.values[data.observed])))
    return 2.0 * (masked_nll(data, family, theta_hat) - saturated)


def max_canonical_angle(S_hat, Q_star) -> float:
    """Largest principal angle in degrees between the column spaces.

    When the dimensions differ, the smaller space is measured against the
    larger one. The angle is computed as ``atan2(sin, cos)`` so it stays
    accurate near 0 and 90 degrees.
    """
    A = _basis(S_hat, "S_hat")
    B = _basis(Q_star, "Q_star")
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"row mismatch: {A.shape[0]} vs {B.shape[0]}")
    if A.shape[1] > B.shape[1]:
        A, B = B, A
    cos = np.linalg.svd(A.T @ B, compute_uv=False).min()
    sin = np.linalg.norm(A - B @ (B.T @ A), ord=2)
    return math.degrees(math.atan2(sin, cos))


def _basis(M, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    B = orth(M)
    if B.shape[1] == 0:
        raise ValueError(f"{name} spans the zero space")
    return B


def align_columns(S_hat, Q_star) -> np.ndarray:
    """Columns of ``S_hat`` reordered to match ``Q_star`` (``p x r*``).

    Pairs are chosen greedily by largest absolute cosine; truth columns left
    without a partner get a zero column.
    """
    S_hat = np.asarray(S_hat, dtype=float)
    Q_star = np.asarray(Q_star, dtype=float)
    ns = np.linalg.norm(S_hat, axis=0)
    nq = np.linalg.norm(Q_star, axis=0)
    cos = np.abs(S_hat.T @ Q_star)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.where(np.outer(ns, nq) > 0, cos / np.outer(ns, nq), 0.0)
    out = np.zeros_like(Q_star)
    free = np.ones(cos.shape, dtype=bool)
    for _ in range(min(cos.shape)):
        i, j = np.unravel_index(np.argmax(np.where(free, cos, -1.0)), cos.shape)
        out[:, j] = S_hat[:, i]
        free[i, :] = False
        free[:, j] = False
    return out


def selection_rates(S_hat, Q_star, mode: str = ELEMENT) -> tuple[float, float]:
    """Missing rate and false-positive rate of the estimated support.

    ``MR`` is the fraction of true nonzeros estimated as zero and ``FP`` the
    fraction of true zeros estimated as nonzero. Element mode compares entries
    after :func:`align_columns`; group mode compares row supports.
    """
    S_hat = np.asarray(S_hat, dtype=float)
    Q_star = np.asarray(Q_star, dtype=float)
    if S_hat.ndim == 1:
        S_hat = S_hat[:, None]
    if Q_star.ndim == 1:
        Q_star = Q_star[:, None]
    if S_hat.shape[0] != Q_star.shape[0]:
        raise ValueError(f"row mismatch: {S_hat.shape[0]} vs {Q_star.shape[0]}")
    if not np.any(Q_star):
        raise ValueError("Q_star has no nonzero entries")
    if mode == GROUP:
        truth = np.any(Q_star != 0, axis=1)
        est = np.any(S_hat != 0, axis=1)
    elif mode == ELEMENT:
        truth = Q_star != 0
        est = align_columns(S_hat, Q_star) != 0
    else:
        raise ValueError(f"mode must be {ELEMENT!r} or {GROUP!r}, got {mode!r}")
    n_true = int(truth.sum())
    n_zero = truth.size - n_true
    mr = int(np.sum(truth & ~est)) / n_true
    fp = int(np.sum(~truth & est)) / n_zero if n_zero else 0.0
    return mr, fp


def trimmed_mean(values, trim: float = 0.1) -> float:
    """Mean after dropping ``floor(trim m)`` values from each end.

    >>> trimmed_mean([0, 1, 2, 3, 100], 0.2)
    2.0
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("trimmed mean of an empty list")
    if not 0 <= trim < 0.5:
        raise ValueError(f"trim must lie in [0, 0.5), got {trim}")
    return float(trim_mean(values, trim))


def evaluate(data: MaskedMatrix, family, theta_hat, S_hat, theta_star, Q_star,
             mode: str = ELEMENT, reference_deviance: float | None = None) -> EvalResult:
    """All metrics for one fit.

    ``deviance_ratio`` divides by ``reference_deviance`` (another fit's
    deviance on the same data); without one it is 1.
    """
    dev = deviance(data, family, theta_hat)
    ratio = 1.0 if reference_deviance is None else dev / reference_deviance
    mr, fp = selection_rates(S_hat, Q_star, mode)
    return EvalResult(
        theta_error=theta_error(theta_hat, theta_star),
        deviance=dev,
        deviance_ratio=ratio,
        max_canonical_angle_deg=max_canonical_angle(S_hat, Q_star),
        miss_rate=mr,
        false_positive_rate=fp,
    )
