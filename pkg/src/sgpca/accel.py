"""Accelerated solver with backtracking line search, and progressive screening.

The accelerated solver is Nesterov's second method wrapped around the same
alpha/S/V projection used by :func:`sgpca.solver.fit`. Progressive screening
replaces the S-step by a group threshold whose row quota decays along a
sigmoid, permanently discarding columns that fall out of the quota.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.special import expit

from .data import FactorModel, MaskedMatrix
from .family import get_family
from .solver import (
    ConfigError,
    FitReport,
    IterInfo,
    SolverConfig,
    _resolve_step,
    _run,
    fit,
    initial_step,
    momentum_weight,
)
from .threshold import ELEMENT, GROUP, SparsityLevel, support, top_k_indices

__all__ = [
    "AccelConfig",
    "ScreenSchedule",
    "momentum_weight",
    "fit_accelerated",
    "screen_quota",
    "progressive_screen_step",
    "fit_progressive",
]

T_MODES = ("outer", "inner", "product")


@dataclass(frozen=True)
class AccelConfig:
    """Backtracking settings.

    ``tau0=None`` restarts every outer iteration from ``1 / ||X||_max``;
    ``warm_start`` instead resumes from the previously accepted step.
    """

    eta: float = 0.5
    max_backtracks: int = 10
    tau0: float | None = None
    warm_start: bool = False

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise ConfigError(f"eta must lie in (0, 1), got {self.eta}")
        if self.max_backtracks < 1:
            raise ConfigError("max_backtracks must be at least 1")
        if self.tau0 is not None and self.tau0 <= 0:
            raise ConfigError(f"tau0 must be positive, got {self.tau0}")


@dataclass(frozen=True)
class ScreenSchedule:
    """Sigmoidal row quota ``2p / (1 + exp(a T))``.

    ``t_mode`` selects ``T`` as the outer index ``k``, the inner index ``t``,
    or their product. ``q_g`` is the final row fraction; when ``None`` the
    solver's group sparsity level is used.
    """

    a: float = 0.05
    t_mode: str = "outer"
    q_g: float | None = None

    def __post_init__(self):
        if not 0.01 <= self.a <= 0.1:
            raise ConfigError(f"decay rate a must lie in [0.01, 0.1], got {self.a}")
        if self.t_mode not in T_MODES:
            raise ConfigError(f"t_mode must be one of {T_MODES}, got {self.t_mode!r}")
        if self.q_g is not None and not 0 < self.q_g <= 1:
            raise ConfigError(f"q_g must lie in (0, 1], got {self.q_g}")


def _target(q_g: float, p: int) -> int:
    return max(1, math.ceil(q_g * p - 1e-9))


def screen_quota(t: int, k: int, sched: ScreenSchedule, p: int, d: int | None = None) -> int:
    """Number of columns allowed to survive at inner step ``t`` of outer step ``k``.

    Clamped below by ``ceil(q_g p)`` and above by the current active count ``d``.
    """
    if t < 1 or k < 1:
        raise ValueError("iteration indices start at 1")
    if sched.q_g is None:
        raise ValueError("schedule has no target q_g")
    T = {"outer": k, "inner": t, "product": k * t}[sched.t_mode]
    quota = math.floor(2 * p * expit(-sched.a * T))
    quota = max(_target(sched.q_g, p), quota)
    return quota if d is None else min(quota, d)


def progressive_screen_step(S, alpha, data_active: MaskedMatrix, quota: int, active):
    """Keep the ``quota`` rows of ``S`` with largest norm and drop the rest.

    Parameters
    ----------
    S : (d, r) array
        S-step candidate on the active columns.
    alpha : (d,) array
    data_active : MaskedMatrix
        Data restricted to the active columns.
    quota : int
        Rows to keep; values below 1 are raised to 1.
    active : (d,) int array
        Original column indices of the active set.

    Returns
    -------
    S, alpha, data, active
        All restricted to the surviving columns, in their original order.
    """
    S = np.asarray(S, dtype=float)
    active = np.asarray(active)
    d = S.shape[0]
    if not (alpha.shape[0] == d == data_active.p == active.shape[0]):
        raise ValueError("S, alpha, data and active set disagree on the active dimension")
    quota = max(1, int(quota))
    if quota > d:
        raise ValueError(f"quota {quota} exceeds active dimension {d}")
    keep = top_k_indices(np.linalg.norm(S, axis=1), quota)
    return S[keep], np.asarray(alpha)[keep], data_active.take_columns(keep), active[keep]


class _Screen:
    """Stateful hook called by the inner loop in place of the plain S-step."""

    def __init__(self, sched: ScreenSchedule, p: int):
        self.sched = sched
        self.p = p
        self.target = _target(sched.q_g, p)

    def select(self, cand: np.ndarray, t: int, k: int):
        d = cand.shape[0]
        quota = screen_quota(t, k, self.sched, self.p, d)
        if quota >= d:
            return None
        return top_k_indices(np.linalg.norm(cand, axis=1), max(1, quota))

    def done(self, d: int) -> bool:
        return d <= self.target


def fit_accelerated(data: MaskedMatrix, family, cfg: SolverConfig, acc: AccelConfig | None = None,
                    init: FactorModel | None = None, *,
                    callback: Callable[[IterInfo], None] | None = None,
                    _screen: _Screen | None = None) -> FitReport:
    """Accelerated fit with backtracking line search.

    Each outer step extrapolates ``Y = (1 - w) Theta + w nu`` with momentum
    weight ``w``, takes a gradient step of size ``tau / w`` from ``Y`` and
    projects it onto the sparse factored form with the alpha/S/V inner loop.
    ``tau`` shrinks by ``eta`` until the sufficient-decrease test holds. The
    projected point becomes the next ``Theta`` unless it would raise the
    objective, in which case ``Theta`` is held; ``nu`` always advances. Every
    iterate, and so the returned model, is feasible.
    """
    if init is None:
        raise ValueError("an initial model is required")
    acc = acc or AccelConfig()
    cfg = replace(cfg, eta=acc.eta, max_backtracks=acc.max_backtracks)
    tau0 = initial_step(data, acc.tau0)
    return _run(data, get_family(family), cfg, init, accelerate=True, tau=tau0, backtrack=True,
                warm_start=acc.warm_start, callback=callback,
                screen=_screen)


def fit_progressive(data: MaskedMatrix, family, cfg: SolverConfig, acc: AccelConfig | None = None,
                    sched: ScreenSchedule | None = None, init: FactorModel | None = None, *,
                    accelerate: bool = True, refit_q_e: float | None = None,
                    callback: Callable[[IterInfo], None] | None = None) -> FitReport:
    """Fit with progressive screening of columns, optionally followed by an
    element-wise sparse refit on the surviving columns.

    ``cfg.sparsity`` must be group-wise; its level is the final row fraction
    unless ``sched.q_g`` is set. The returned model is in the original ``p``
    coordinates with zero loadings on eliminated columns; ``report.active``
    lists the survivors. With ``refit_q_e`` the refit keeps a ``refit_q_e``
    fraction of the ``d * r`` entries of the surviving loadings.
    """
    if init is None:
        raise ValueError("an initial model is required")
    if cfg.sparsity.mode != GROUP:
        raise ConfigError("progressive screening needs group-wise sparsity")
    sched = sched or ScreenSchedule()
    if sched.q_g is None:
        sched = replace(sched, q_g=cfg.sparsity.q)
    family = get_family(family)
    screen = _Screen(sched, data.p)
    if refit_q_e is not None and screen.target < cfg.r:
        raise ConfigError(f"screening keeps {screen.target} columns, fewer than the rank "
                          f"{cfg.r} needed by the refit; raise q_g or lower the rank")
    if accelerate:
        report = fit_accelerated(data, family, cfg, acc, init, callback=callback, _screen=screen)
    else:
        tau, backtrack = _resolve_step(family, cfg, data)
        report = _run(data, family, cfg, init, accelerate=False, tau=tau, backtrack=backtrack,
                      callback=callback, screen=screen)
    if refit_q_e is None:
        return report

    active = report.active
    sub = data.take_columns(active)
    m = report.model
    sub_cfg = replace(cfg, sparsity=SparsityLevel(refit_q_e, ELEMENT))
    sub_init = FactorModel(m.alpha[active], m.V, m.S[active])
    if accelerate:
        refit = fit_accelerated(sub, family, sub_cfg, acc, sub_init, callback=callback)
    else:
        refit = fit(sub, family, sub_cfg, sub_init, callback=callback)
    alpha = m.alpha.copy()
    alpha[active] = refit.model.alpha
    S = np.zeros_like(m.S)
    S[active] = refit.model.S
    model = FactorModel(alpha, refit.model.V, S)
    return FitReport(
        model=model,
        objective_trace=np.concatenate([report.objective_trace, refit.objective_trace]),
        iterations=report.iterations + refit.iterations,
        converged=refit.converged,
        support=support(S, ELEMENT),
        wall_time=report.wall_time + refit.wall_time,
        objective=refit.objective,
        status=refit.status,
        active=active,
        rank_deficient_steps=report.rank_deficient_steps + refit.rank_deficient_steps,
    )
