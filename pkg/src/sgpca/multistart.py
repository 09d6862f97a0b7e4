"""Two-stage multiple random starts.

Every one of ``m1`` random starts gets ``n1`` outer iterations; the ``m2``
with the lowest objective are then run to convergence and the best of those
is returned.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .data import FactorModel, MaskedMatrix
from .family import DomainError, get_family
from .solver import ConfigError, FitReport, SolverConfig, fit

FitFn = Callable[[MaskedMatrix, object, SolverConfig, FactorModel], FitReport]

# (m1, m2) per family
DEFAULT_STARTS = {"gaussian": (10, 2), "bernoulli": (20, 3), "poisson": (30, 5)}


class MultiStartError(RuntimeError):
    """Every random start failed."""

    def __init__(self, failures: list[tuple[int, Exception]]):
        self.failures = failures
        lines = "\n".join(f"  start {i}: {type(e).__name__}: {e}" for i, e in failures)
        super().__init__(f"all {len(failures)} starts failed:\n{lines}")


@dataclass(frozen=True)
class MultiStartConfig:
    m1: int = 10
    m2: int = 2
    n1: int = 2
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.m2 <= self.m1:
            raise ValueError(f"need 1 <= m2 <= m1, got m1={self.m1}, m2={self.m2}")
        if self.n1 < 1:
            raise ValueError(f"n1 must be at least 1, got {self.n1}")

    @classmethod
    def for_family(cls, family, seed: int = 0, n1: int = 2) -> MultiStartConfig:
        m1, m2 = DEFAULT_STARTS.get(get_family(family).name, (10, 2))
        return cls(m1=m1, m2=m2, n1=n1, seed=seed)


def start_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for random start ``index`` under master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(b"init"), index]))


def random_init(n: int, p: int, r: int, seed: int | np.random.Generator = 0,
                alpha=None) -> FactorModel:
    """``alpha = 0`` (or the given intercept), QR-orthonormalized Gaussian ``V``, ``S = 0.1 N(0, 1)``."""
    if not 1 <= r <= min(n, p):
        raise ValueError(f"rank must lie in [1, min(n, p)], got {r}")
    rng = np.random.default_rng(seed)
    V, _ = np.linalg.qr(rng.standard_normal((n, r)))
    S = 0.1 * rng.standard_normal((p, r))
    alpha = np.zeros(p) if alpha is None else np.asarray(alpha, dtype=float)
    return FactorModel(alpha, V, S)


def default_alpha(data: MaskedMatrix, family):
    """Intercept for random starts: zero, or the linked column means when the
    natural parameter is sign-restricted (so the start lies in the domain)."""
    family = get_family(family)
    if not family.restricted_domain:
        return None
    return family.link(data.column_means())


def _map(fn, items, n_jobs: int):
    if n_jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def _attempt(fn):
    def run(arg):
        try:
            return fn(arg)
        except ConfigError:
            raise
        except (DomainError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
            return exc
    return run


def _join(short: FitReport, cont: FitReport) -> FitReport:
    return replace(
        cont,
        objective_trace=np.concatenate([short.objective_trace, cont.objective_trace[1:]]),
        iterations=short.iterations + cont.iterations,
        wall_time=short.wall_time + cont.wall_time,
        rank_deficient_steps=short.rank_deficient_steps + cont.rank_deficient_steps,
    )


def multi_start_fit(data: MaskedMatrix, family, cfg: SolverConfig, ms: MultiStartConfig,
                    fit_fn: FitFn = fit, *, n_jobs: int = 1) -> FitReport:
    """Best fit over ``ms.m1`` random starts.

    ``fit_fn(data, family, cfg, init)`` is any of the solvers. Starts are
    seeded from ``ms.seed`` and their index, so the result does not depend on
    ``n_jobs``. Ties in objective go to the lower start index. With
    ``m2 == m1`` no start is discarded and the warm-up stage is skipped.
    """
    family = get_family(family)
    alpha0 = default_alpha(data, family)
    inits = [random_init(data.n, data.p, cfg.r, start_rng(ms.seed, i), alpha0)
             for i in range(ms.m1)]

    if ms.m2 == ms.m1:
        finals = _map(_attempt(lambda init: fit_fn(data, family, cfg, init)), inits, n_jobs)
        return _best(list(enumerate(finals)))

    short_cfg = replace(cfg, max_outer=min(ms.n1, cfg.max_outer))
    shorts = _map(_attempt(lambda init: fit_fn(data, family, short_cfg, init)), inits, n_jobs)
    ok = [(i, rep) for i, rep in enumerate(shorts) if isinstance(rep, FitReport)]
    if not ok:
        raise MultiStartError(list(enumerate(shorts)))
    # stable sort keeps the lower index first among equal objectives
    ok.sort(key=lambda item: _score(item[1]))
    chosen = ok[: ms.m2]

    rest = max(1, cfg.max_outer - short_cfg.max_outer)
    cont_cfg = replace(cfg, max_outer=rest)

    def proceed(item):
        _, short = item
        if short.converged or short.line_search_failed:
            return short
        return _join(short, fit_fn(data, family, cont_cfg, short.model))

    finals = _map(_attempt(proceed), chosen, n_jobs)
    return _best([(i, rep) for (i, _), rep in zip(chosen, finals)])


def _score(rep: FitReport) -> float:
    return rep.objective if np.isfinite(rep.objective) else np.inf


def _best(results: list[tuple[int, FitReport | Exception]]) -> FitReport:
    ok = [(i, rep) for i, rep in results if isinstance(rep, FitReport)]
    if not ok:
        raise MultiStartError([(i, e) for i, e in results])
    return min(ok, key=lambda item: (_score(item[1]), item[0]))[1]
