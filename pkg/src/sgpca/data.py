"""Masked data container, factor model, and the masked likelihood."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .family import DomainError, Family

MISSING_TOKENS = frozenset({"", "na", "nan"})


class MaskedMatrix:
    """Observed data ``X`` with a 0/1 mask ``H`` of observed cells.

    Masked cells are stored as 0 so that ``values`` is already ``H * X``.
    NaN entries in ``values`` are treated as missing when no mask is given.
    Instances are read-only.
    """

    def __init__(self, values, mask=None):
        values = np.array(values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"data must be 2-D, got shape {values.shape}")
        if mask is None:
            mask = ~np.isnan(values)
        else:
            mask = np.asarray(mask)
            if mask.shape != values.shape:
                raise ValueError(f"mask shape {mask.shape} != data shape {values.shape}")
            if not np.isin(mask, (0, 1)).all():
                raise ValueError("mask entries must be 0 or 1")
            mask = mask.astype(bool) & ~np.isnan(values)
        values[~mask] = 0.0
        self.values = values
        self.mask = mask.astype(float)
        self._observed = mask.astype(bool)
        for arr in (self.values, self.mask, self._observed):
            arr.flags.writeable = False

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def observed(self) -> np.ndarray:
        """Boolean view of the mask."""
        return self._observed

    def take_columns(self, idx) -> MaskedMatrix:
        return MaskedMatrix(self.values[:, idx], self.mask[:, idx])

    def column_means(self) -> np.ndarray:
        """Means over observed entries; 0 for fully masked columns."""
        counts = self.mask.sum(axis=0)
        return np.divide(
            self.values.sum(axis=0), counts, out=np.zeros(self.p), where=counts > 0
        )

    def centered(self) -> tuple[MaskedMatrix, np.ndarray]:
        """Subtract observed-entry column means; returns the data and the means."""
        means = self.column_means()
        return MaskedMatrix(self.values - means, self.mask), means

    def with_nan(self) -> np.ndarray:
        out = self.values.copy()
        out[~self.observed] = np.nan
        return out

    def __repr__(self) -> str:
        return f"MaskedMatrix(n={self.n}, p={self.p}, observed={int(self.mask.sum())})"


def read_csv(path, header: bool = False) -> MaskedMatrix:
    """Read a rectangular numeric CSV; empty, ``NA`` or ``NaN`` cells are missing."""
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        if header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=2 if header else 1):
            if not row:
                continue
            parsed = []
            for col, cell in enumerate(row):
                token = cell.strip()
                if token.lower() in MISSING_TOKENS:
                    parsed.append(np.nan)
                    continue
                try:
                    parsed.append(float(token))
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: column {col + 1}: cannot parse {cell!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"{path}: row {i + 1} has {len(row)} fields, expected {width}")
    return MaskedMatrix(np.array(rows, dtype=float))


@dataclass
class FactorModel:
    """``Theta = 1 alpha^T + V S^T`` with ``V^T V = I``."""

    alpha: np.ndarray
    V: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        self.V = np.asarray(self.V, dtype=float)
        self.S = np.asarray(self.S, dtype=float)
        if self.V.ndim != 2 or self.S.ndim != 2:
            raise ValueError("V and S must be 2-D")
        if self.V.shape[1] != self.S.shape[1]:
            raise ValueError(f"rank mismatch: V {self.V.shape}, S {self.S.shape}")
        if self.S.shape[0] != self.alpha.shape[0]:
            raise ValueError(f"alpha has length {self.alpha.shape[0]}, S has {self.S.shape[0]} rows")

    @property
    def r(self) -> int:
        return self.S.shape[1]

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def p(self) -> int:
        return self.S.shape[0]

    def theta(self) -> np.ndarray:
        return theta(self)

    def copy(self) -> FactorModel:
        return FactorModel(self.alpha.copy(), self.V.copy(), self.S.copy())

    def orthonormality_error(self) -> float:
        return float(np.linalg.norm(self.V.T @ self.V - np.eye(self.r)))

    def sign_normalized(self) -> FactorModel:
        """Flip (V, S) column pairs so each S column's largest-magnitude entry is positive."""
        V, S = self.V.copy(), self.S.copy()
        for j in range(self.r):
            i = int(np.argmax(np.abs(S[:, j])))
            if S[i, j] < 0:
                S[:, j] = -S[:, j]
                V[:, j] = -V[:, j]
        return FactorModel(self.alpha.copy(), V, S)


def theta(model: FactorModel) -> np.ndarray:
    """Natural-parameter matrix ``1 alpha^T + V S^T``."""
    if model.V.shape[0] == 0:
        raise ValueError("V has no rows")
    return model.alpha[None, :] + model.V @ model.S.T


def _check_shapes(data: MaskedMatrix, theta_mat: np.ndarray) -> None:
    if theta_mat.shape != data.shape:
        raise ValueError(f"theta shape {theta_mat.shape} != data shape {data.shape}")


def _observed_theta(data: MaskedMatrix, family: Family, theta_mat: np.ndarray) -> np.ndarray:
    """Theta with masked cells replaced by a domain-safe value where needed."""
    if not family.restricted_domain:
        return theta_mat
    th = np.where(data.observed, theta_mat, family.link(np.ones(1)).item())
    family.inv_link(th)  # raises DomainError naming the entry
    return th


def masked_nll(data: MaskedMatrix, family: Family, theta_mat) -> float:
    """``-<H*X, Theta> + <H, b(Theta)>``; masked cells contribute nothing."""
    theta_mat = np.asarray(theta_mat, dtype=float)
    _check_shapes(data, theta_mat)
    th = _observed_theta(data, family, theta_mat)
    with np.errstate(invalid="ignore", over="ignore"):
        cell = np.where(data.observed, family.log_partition(th) - data.values * th, 0.0)
    return float(cell.sum())


def grad_theta(data: MaskedMatrix, family: Family, theta_mat) -> np.ndarray:
    """Gradient of the masked loss in Theta: ``-H*X + H*g^{-1}(Theta)``."""
    theta_mat = np.asarray(theta_mat, dtype=float)
    _check_shapes(data, theta_mat)
    th = _observed_theta(data, family, theta_mat)
    with np.errstate(invalid="ignore", over="ignore"):
        return np.where(data.observed, family.inv_link(th) - data.values, 0.0)


def gradients(data: MaskedMatrix, family: Family, model: FactorModel):
    """Gradients of the masked loss in ``(S, V, alpha)``.

    Returns
    -------
    G_S : (p, r) ndarray
    G_V : (n, r) ndarray
    G_alpha : (p,) ndarray
    """
    G = grad_theta(data, family, model.theta())
    return G.T @ model.V, G @ model.S, G.sum(axis=0)
