"""Surrogate-based block coordinate descent for sparse generalized PCA.

At every outer iteration the likelihood is linearized at the current natural
parameter and a quadratic surrogate centred at ``Xi`` is minimized over the
factored form ``1 alpha^T + V S^T`` by cycling closed-form alpha, thresholded S
and Procrustes V updates.
"""

from __future__ import annotations

import logging
import time
import zlib
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .data import FactorModel, MaskedMatrix, grad_theta, masked_nll
from .family import DomainError, Family, get_family
from .threshold import SparsityLevel, support

log = logging.getLogger(__name__)

UNIVERSAL = "universal"
FIXED = "fixed"
LINE_SEARCH = "line_search"
STEP_POLICIES = (UNIVERSAL, FIXED, LINE_SEARCH)


class ConfigError(ValueError):
    """Solver settings that cannot work for the given family or data."""


@dataclass(frozen=True)
class SolverConfig:
    """Settings shared by all fitting routines.

    ``tau`` is the step size for the ``fixed`` policy and, when given, the
    initial step for ``line_search``. ``eta`` and ``max_backtracks`` control
    backtracking.
    """

    r: int
    sparsity: SparsityLevel = field(default_factory=SparsityLevel)
    max_outer: int = 500
    max_inner: int = 50
    tol_outer: float = 1e-6
    tol_inner: float = 1e-6
    step_policy: str = UNIVERSAL
    tau: float | None = None
    eta: float = 0.5
    max_backtracks: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.r < 1:
            raise ConfigError(f"rank must be positive, got {self.r}")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ConfigError("iteration caps must be at least 1")
        if self.tol_outer < 0 or self.tol_inner < 0:
            raise ConfigError("tolerances must be nonnegative")
        if self.step_policy not in STEP_POLICIES:
            raise ConfigError(f"step policy must be one of {STEP_POLICIES}, got {self.step_policy!r}")
        if self.step_policy == FIXED and (self.tau is None or self.tau <= 0):
            raise ConfigError("the fixed step policy needs a positive tau")
        if self.tau is not None and self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if not 0 < self.eta < 1:
            raise ConfigError(f"eta must lie in (0, 1), got {self.eta}")
        if self.max_backtracks < 1:
            raise ConfigError("max_backtracks must be at least 1")


@dataclass
class FitReport:
    model: FactorModel
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    support: np.ndarray
    wall_time: float
    objective: float
    status: str = "converged"
    #: original column indices still active (progressive screening), else all
    active: np.ndarray | None = None
    rank_deficient_steps: int = 0

    @property
    def line_search_failed(self) -> bool:
        return self.status == "line_search_failed"


@dataclass
class IterInfo:
    """Snapshot handed to ``callback`` after each accepted outer iteration."""

    k: int
    model: FactorModel
    theta: np.ndarray
    objective: float
    active: np.ndarray
    tau: float
    momentum: float
    n_ls: int
    Y: np.ndarray
    candidate: np.ndarray


def objective(data: MaskedMatrix, family: Family, model: FactorModel) -> float:
    """Masked negative log-likelihood of a feasible model."""
    return masked_nll(data, family, model.theta())


def _safe_nll(data: MaskedMatrix, family: Family, theta: np.ndarray) -> float:
    try:
        f = masked_nll(data, family, theta)
    except DomainError:
        return np.inf
    return f if np.isfinite(f) else np.inf


# --------------------------------------------------------------------------
# sub-steps


def xi_update(data: MaskedMatrix, family: Family, theta_prev, rho: float) -> np.ndarray:
    """Gradient step ``Theta + (H*X - H*g^{-1}(Theta)) / rho`` on the natural parameter."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    theta_prev = np.asarray(theta_prev, dtype=float)
    return theta_prev - grad_theta(data, get_family(family), theta_prev) / rho


def alpha_step(xi, V, S) -> np.ndarray:
    """Closed-form intercept ``(Xi^T - S V^T) 1 / n``."""
    xi, V, S = np.asarray(xi), np.asarray(V), np.asarray(S)
    if xi.shape != (V.shape[0], S.shape[0]) or V.shape[1] != S.shape[1]:
        raise ValueError(f"shape mismatch: xi {xi.shape}, V {V.shape}, S {S.shape}")
    return xi.mean(axis=0) - S @ V.mean(axis=0)


def _loading_candidate(xi, alpha, V) -> np.ndarray:
    # (Xi^T - alpha 1^T) V without forming the centred matrix
    return xi.T @ V - np.outer(alpha, V.sum(axis=0))


def s_step(xi, alpha, V, sparsity: SparsityLevel) -> np.ndarray:
    """Thresholded least-squares loadings given orthonormal ``V``."""
    xi, alpha, V = np.asarray(xi), np.asarray(alpha), np.asarray(V)
    if xi.shape != (V.shape[0], alpha.shape[0]):
        raise ValueError(f"shape mismatch: xi {xi.shape}, alpha {alpha.shape}, V {V.shape}")
    return sparsity.apply(_loading_candidate(xi, alpha, V))


def _procrustes(M: np.ndarray, seed: int = 0) -> tuple[np.ndarray, int]:
    """Orthonormal ``V`` maximizing ``<V, M>``, and the numerical rank of ``M``.

    Missing left singular directions are filled from a seeded random
    orthonormal completion so ``V^T V = I`` always holds.
    """
    n, r = M.shape
    P, sig, Qt = np.linalg.svd(M, full_matrices=False)
    tol = max(M.shape) * np.finfo(float).eps * (sig[0] if sig.size else 0.0)
    rank = int(np.sum(sig > tol)) if sig.size and sig[0] > 0 else 0
    if rank < r:
        rng = np.random.default_rng([seed, zlib.crc32(b"procrustes")])
        fill = rng.standard_normal((n, r - rank))
        Pk = P[:, :rank]
        fill -= Pk @ (Pk.T @ fill)
        fill, _ = np.linalg.qr(fill)
        fill -= Pk @ (Pk.T @ fill)
        fill, _ = np.linalg.qr(fill)
        P = np.hstack([Pk, fill])
    return P @ Qt, rank


def v_step(xi, alpha, S, seed: int = 0) -> np.ndarray:
    """Procrustes rotation: ``P Q^T`` from the SVD of ``(Xi - 1 alpha^T) S``."""
    xi, alpha, S = np.asarray(xi), np.asarray(alpha), np.asarray(S)
    if xi.shape[1] != S.shape[0] or alpha.shape[0] != S.shape[0]:
        raise ValueError(f"shape mismatch: xi {xi.shape}, alpha {alpha.shape}, S {S.shape}")
    if not np.any(S):
        raise ValueError("S is identically zero; V is undetermined")
    V, _ = _procrustes(xi @ S - np.outer(np.ones(xi.shape[0]), alpha @ S), seed)
    return V


def surrogate_value(xi, model: FactorModel) -> float:
    """``0.5 * ||1 alpha^T + V S^T - Xi||_F^2``."""
    return 0.5 * float(np.sum((model.theta() - xi) ** 2))


@dataclass
class _InnerResult:
    model: FactorModel
    keep: np.ndarray | None
    cycles: int
    deficient: int
    trace: list


def _inner(xi, init: FactorModel, cfg: SolverConfig, screen=None, k: int = 1,
           record: bool = False) -> _InnerResult:
    alpha, V, S = init.alpha, init.V, init.S
    n = xi.shape[0]
    keep = None
    deficient = 0
    trace = [surrogate_value(xi, init)] if record else []
    t = 0
    for t in range(1, cfg.max_inner + 1):
        a_new = xi.mean(axis=0) - S @ V.mean(axis=0)
        cand = _loading_candidate(xi, a_new, V)
        dropped = False
        if screen is not None:
            sel = screen.select(cand, t, k)
            if sel is not None:
                xi, a_new, cand = xi[:, sel], a_new[sel], cand[sel]
                alpha, S = alpha[sel], S[sel]
                keep = sel if keep is None else keep[sel]
                dropped = True
            S_new = cand
        else:
            S_new = cfg.sparsity.apply(cand)
        V_new, rank = _procrustes(xi @ S_new - np.outer(np.ones(n), a_new @ S_new), cfg.seed)
        if rank < cfg.r:
            deficient += 1
        change = max(
            np.max(np.abs(a_new - alpha), initial=0.0),
            np.max(np.abs(S_new - S), initial=0.0),
            np.max(np.abs(V_new - V), initial=0.0),
        )
        alpha, S, V = a_new, S_new, V_new
        if record:
            trace.append(surrogate_value(xi, FactorModel(alpha, V, S)))
        if change <= cfg.tol_inner and not dropped:
            break
    return _InnerResult(FactorModel(alpha, V, S), keep, t, deficient, trace)


def inner_loop(xi, init: FactorModel, cfg: SolverConfig) -> FactorModel:
    """Cycle alpha -> S -> V on the surrogate centred at ``xi``.

    Stops after ``cfg.max_inner`` cycles or once every block changes by at
    most ``cfg.tol_inner`` in max-norm.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (init.n, init.p):
        raise ValueError(f"xi shape {xi.shape} does not match model ({init.n}, {init.p})")
    return _inner(xi, init, cfg).model


# --------------------------------------------------------------------------
# outer loop shared by the plain and accelerated solvers


def _resolve_step(family: Family, cfg: SolverConfig, data: MaskedMatrix):
    """Returns (tau, backtrack)."""
    if cfg.step_policy == UNIVERSAL:
        tau = family.universal_step()
        if tau is None:
            raise ConfigError(
                f"the {family.name} family has no universal step size; "
                "use the line_search (or fixed) step policy, or the accelerated solver"
            )
        return tau, False
    if cfg.step_policy == FIXED:
        return cfg.tau, False
    return initial_step(data, cfg.tau), True


def initial_step(data: MaskedMatrix, tau0: float | None = None) -> float:
    """Default starting step ``1 / ||X||_max`` (1 for all-zero data)."""
    if tau0 is not None:
        return tau0
    xmax = float(np.max(np.abs(data.values), initial=0.0))
    return 1.0 / xmax if xmax > 0 else 1.0


def ls_slack(f_ref: float, f_new: float) -> float:
    """Round-off allowance for the sufficient-decrease test.

    Both sides are sums of ``n p`` cell terms of size about ``|f|``, so near a
    stationary point they agree to within a few ulps of ``|f|``; without the
    allowance the search shrinks the step until it gives up.
    """
    return 64 * np.finfo(float).eps * max(abs(f_ref), abs(f_new), 1.0)


def _check_init(data: MaskedMatrix, cfg: SolverConfig, init: FactorModel) -> None:
    if init.V.shape != (data.n, cfg.r) or init.S.shape != (data.p, cfg.r):
        raise ValueError(
            f"init shapes V {init.V.shape}, S {init.S.shape} do not match "
            f"data {data.shape} at rank {cfg.r}"
        )
    if cfg.r > min(data.n, data.p):
        raise ConfigError(f"rank {cfg.r} exceeds min(n, p) = {min(data.shape)}")


def _run(data: MaskedMatrix, family, cfg: SolverConfig, init: FactorModel, *,
         accelerate: bool, tau: float, backtrack: bool, warm_start: bool = False,
         callback: Callable[[IterInfo], None] | None = None, screen=None) -> FitReport:
    start = time.perf_counter()
    family = get_family(family)
    _check_init(data, cfg, init)
    family.check_data(data.values, data.observed)

    p_full = data.p
    model = init.copy()
    if screen is None:
        model.S = cfg.sparsity.apply(model.S)
    active = np.arange(p_full)
    alpha_full = model.alpha.copy()

    theta_cur = model.theta()
    nu_cur = theta_cur
    f_cur = masked_nll(data, family, theta_cur)
    if not np.isfinite(f_cur):
        raise DomainError("objective is not finite at the initial point")
    trace = [f_cur]
    warm = model
    tau0, tau_prev = tau, None
    status = "max_iter"
    deficient = 0
    k = 0

    for k in range(1, cfg.max_outer + 1):
        th = momentum_weight(k) if accelerate else 1.0
        Y = nu_cur if th == 1.0 else (1 - th) * theta_cur + th * nu_cur
        gY = grad_theta(data, family, Y)
        fY = f_cur if Y is theta_cur else None
        base = tau0 if not (warm_start and tau_prev) else tau_prev / cfg.eta
        step = base
        accepted = False
        n_ls = 0
        while True:
            n_ls += 1
            if backtrack:
                step = base * cfg.eta**n_ls
            with np.errstate(over="ignore", invalid="ignore"):
                xi = Y - (step / th) * gY
            if not np.all(np.isfinite(xi)):
                # an overflowing trial point counts as a rejected step
                if not backtrack or n_ls > cfg.max_backtracks:
                    break
                continue
            res = _inner(xi, warm, cfg, screen, k)
            deficient += res.deficient
            keep = res.keep
            if keep is None:
                sub, Yk, gk = data, Y, gY
            else:
                sub = data.take_columns(keep)
                Yk, gk = Y[:, keep], gY[:, keep]
            cand = res.model.theta()
            f_new = _safe_nll(sub, family, cand)
            if not backtrack:
                accepted = np.isfinite(f_new)
                break
            if fY is None or keep is not None:
                fYk = _safe_nll(sub, family, Yk)
            else:
                fYk = fY
            D = cand - Yk
            bound = fYk + float(np.vdot(gk, D)) + th / (2 * step) * float(np.vdot(D, D))
            if f_new <= bound + ls_slack(fYk, f_new):
                accepted = True
                break
            if n_ls > cfg.max_backtracks:
                break
        if not accepted:
            status = "line_search_failed" if backtrack else "diverged"
            log.warning("outer iteration %d: %s", k, status)
            break
        tau_prev = step

        if keep is not None:
            alpha_full[active] = model.alpha
            active = active[keep]
            data, theta_cur, nu_cur = sub, theta_cur[:, keep], nu_cur[:, keep]
            model = FactorModel(model.alpha[keep], model.V, model.S[keep])
            f_cur = masked_nll(data, family, theta_cur)
        # the momentum point moves 1/theta as far as the projected step
        nu_next = cand if th == 1.0 else theta_cur + (cand - theta_cur) / th
        if accelerate and f_new > f_cur:
            # monotone safeguard: keep the current iterate, still advance the momentum point
            theta_next, f_next = theta_cur, f_cur
        else:
            theta_next, f_next, model = cand, f_new, res.model
        warm = res.model
        trace.append(f_next)
        if callback is not None:
            callback(IterInfo(k, model, theta_next, f_next, active.copy(), step, th, n_ls,
                              Yk, cand))

        d_theta = float(np.max(np.abs(cand - theta_cur)))
        settled = keep is None and (screen is None or screen.done(data.p))
        theta_cur, nu_cur, f_prev, f_cur = theta_next, nu_next, f_cur, f_next
        if settled and d_theta <= cfg.tol_outer and abs(f_cur - f_prev) <= cfg.tol_outer:
            status = "converged"
            break

    if screen is not None:
        alpha_full[active] = model.alpha
        S_full = np.zeros((p_full, cfg.r))
        S_full[active] = model.S
        model = FactorModel(alpha_full, model.V, S_full)
    model = model.sign_normalized()
    return FitReport(
        model=model,
        objective_trace=np.array(trace),
        iterations=k,
        converged=status == "converged",
        support=support(model.S, cfg.sparsity.mode),
        wall_time=time.perf_counter() - start,
        objective=float(f_cur),
        status=status,
        active=active,
        rank_deficient_steps=deficient,
    )


def momentum_weight(k: int) -> float:
    """Momentum weight: 1 for the first two iterations, then ``2 / (k + 2)``.

    >>> [momentum_weight(k) for k in (1, 2, 3, 8)]
    [1.0, 1.0, 0.4, 0.2]
    """
    if k < 1:
        raise ValueError(f"iteration index must be >= 1, got {k}")
    return 1.0 if k <= 2 else 2.0 / (k + 2)


def fit(data: MaskedMatrix, family, cfg: SolverConfig, init: FactorModel, *,
        callback: Callable[[IterInfo], None] | None = None) -> FitReport:
    """Fit by the surrogate/BCD outer loop.

    With the ``universal`` policy the step is ``1 / sup b''`` (1 for Gaussian,
    4 for Bernoulli), which makes the objective trace nonincreasing.
    ``line_search`` backtracks until the surrogate majorizes the objective at
    the new iterate; ``fixed`` uses ``cfg.tau`` as is.

    Raises
    ------
    ConfigError
        If the universal policy is requested for a family without one.
    """
    family = get_family(family)
    tau, backtrack = _resolve_step(family, cfg, data)
    return _run(data, family, cfg, init, accelerate=False, tau=tau, backtrack=backtrack,
                callback=callback)


def with_max_outer(cfg: SolverConfig, max_outer: int) -> SolverConfig:
    return replace(cfg, max_outer=max_outer)
