"""Quantile (top-k) hard thresholding for the l0 cardinality constraints.

Both operators keep exactly ``k = max(1, floor(q * count))`` entries (or rows)
of largest magnitude. Ties at the k-th magnitude are broken in favour of the
smaller row-major index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ELEMENT = "element"
GROUP = "group"

# absorbs representation error in products such as 0.07 * 100
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class SparsityLevel:
    """Fraction ``q`` of nonzero entries (``element``) or rows (``group``) allowed."""

    q: float = 1.0
    mode: str = ELEMENT

    def __post_init__(self):
        _check_q(self.q)
        if self.mode not in (ELEMENT, GROUP):
            raise ValueError(f"sparsity mode must be {ELEMENT!r} or {GROUP!r}, got {self.mode!r}")

    def budget(self, p: int, r: int) -> int:
        """Maximum number of nonzero entries (element) or rows (group)."""
        count = p * r if self.mode == ELEMENT else p
        return cardinality(self.q, count)

    def apply(self, S: np.ndarray) -> np.ndarray:
        if self.mode == ELEMENT:
            return quantile_threshold_elem(S, self.q)
        return quantile_threshold_group(S, self.q)


def _check_q(q: float) -> None:
    if not (0.0 < q <= 1.0):
        raise ValueError(f"sparsity level must lie in (0, 1], got {q}")


def cardinality(q: float, count: int) -> int:
    """Number of survivors ``max(1, floor(q * count))`` (never above ``count``)."""
    _check_q(q)
    if count <= 0:
        return 0
    return min(count, max(1, math.floor(q * count + _FLOOR_EPS)))


def top_k_indices(scores: np.ndarray, k: int) -> np.ndarray:
    """Sorted indices of the ``k`` largest scores; ties go to the smaller index."""
    scores = np.asarray(scores).ravel()
    if k >= scores.size:
        return np.arange(scores.size)
    # stable sort keeps original order among equal scores
    order = np.argsort(-scores, kind="stable")
    return np.sort(order[:k])


def keep_top_entries(S: np.ndarray, k: int) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if k >= S.size:
        return S.copy()
    keep = top_k_indices(np.abs(S), k)
    out = np.zeros_like(S)
    out.flat[keep] = S.flat[keep]
    return out


def keep_top_rows(S: np.ndarray, k: int) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if k >= S.shape[0]:
        return S.copy()
    keep = top_k_indices(np.linalg.norm(S, axis=1), k)
    out = np.zeros_like(S)
    out[keep] = S[keep]
    return out


def quantile_threshold_elem(S, q_e: float) -> np.ndarray:
    """Keep the ``floor(q_e * p * r)`` entries of largest absolute value.

    >>> quantile_threshold_elem(np.array([[3.0], [-1.0], [0.5], [2.0]]), 0.5).ravel()
    array([3., 0., 0., 2.])
    """
    S = np.asarray(S, dtype=float)
    return keep_top_entries(S, cardinality(q_e, S.size))


def quantile_threshold_group(S, q_g: float) -> np.ndarray:
    """Keep the ``floor(q_g * p)`` rows of largest Euclidean norm; zero the others."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2:
        raise ValueError(f"expected a 2-D loading matrix, got shape {S.shape}")
    return keep_top_rows(S, cardinality(q_g, S.shape[0]))


def support(S: np.ndarray, mode: str = ELEMENT) -> np.ndarray:
    """Nonzero positions: ``(m, 2)`` index pairs for element mode, row indices for group mode."""
    S = np.asarray(S)
    if mode == GROUP:
        return np.flatnonzero(np.any(S != 0, axis=1))
    return np.argwhere(S != 0)
