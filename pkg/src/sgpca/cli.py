"""Command-line interface: ``sgpca {fit,simulate,eval,bench}``.

Exit codes: 0 success, 1 unreadable or invalid data, 2 bad configuration
(including usage errors), 3 numerical failure (outputs are still written).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .accel import AccelConfig, ScreenSchedule, fit_accelerated, fit_progressive
from .data import FactorModel, MaskedMatrix, read_csv
from .family import DomainError, get_family
from .metrics import EvalResult, evaluate, trimmed_mean
from .multistart import MultiStartConfig, MultiStartError, default_alpha, multi_start_fit
from .sim import SETTINGS, generate_data, setting_spec
from .solver import FIXED, LINE_SEARCH, UNIVERSAL, ConfigError, FitReport, SolverConfig, fit
from .threshold import ELEMENT, GROUP, SparsityLevel

log = logging.getLogger("sgpca")

EXIT_OK, EXIT_DATA, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class DataError(Exception):
    """Input that cannot be read or does not fit the requested model."""


# --------------------------------------------------------------------------
# CSV output


def fmt(x) -> str:
    x = float(x)
    return "NA" if math.isnan(x) else repr(x)


def write_matrix(path: Path, M) -> None:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    with path.open("w") as fh:
        for row in M:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_table(path_or_fh, header: list[str], rows: list[list]) -> None:
    def cell(v):
        return fmt(v) if isinstance(v, (float, np.floating)) else str(v)

    lines = [",".join(header)] + [",".join(cell(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_fh, "write"):
        path_or_fh.write(text)
    else:
        Path(path_or_fh).write_text(text)


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_matrix(path) -> np.ndarray:
    try:
        return read_csv(path).with_nan()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    except ValueError as exc:
        raise DataError(str(exc)) from None


# --------------------------------------------------------------------------
# configuration files


def read_config(path) -> dict:
    """``key = value`` lines (``#`` comments), or a JSON object / fit manifest."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        return dict(obj.get("params", obj))
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


class Options:
    """Explicit flags over config-file values over built-in defaults."""

    def __init__(self, parser: argparse.ArgumentParser, args: argparse.Namespace,
                 defaults: dict, types: dict):
        self.parser = parser
        self.values = {}
        config = {}
        if getattr(args, "config", None):
            try:
                config = read_config(args.config)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(config) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key, default in defaults.items():
            explicit = getattr(args, key, None)
            if explicit is not None:
                value = explicit
            elif key in config and config[key] is not None:
                value = _coerce(config[key], types.get(key, str), key)
            else:
                value = default
            self.values[key] = value

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None


def _coerce(value, kind, key):
    if isinstance(value, str) and value.lower() in ("", "none", "null"):
        return None
    try:
        if kind is bool:
            if isinstance(value, bool):
                return value
            low = str(value).lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {key!r}: cannot interpret {value!r}") from None


# --------------------------------------------------------------------------
# fitting


FIT_DEFAULTS = {
    "input": None, "header": False, "family": None, "rank": None, "qe": None, "qg": None,
    "center": False, "accelerate": False, "eta": 0.5, "max_backtracks": 10, "warm_start": False,
    "screen": False, "screen_a": 0.05, "screen_mode": "outer", "starts": None,
    "survivors": None, "warmup": 2, "step": None, "tau": None, "init": "random",
    "max_outer": 500, "max_inner": 50, "tol_outer": 1e-6, "tol_inner": 1e-6, "seed": 0,
    "jobs": 1, "emit_theta": False, "out": None,
}
FIT_TYPES = {
    "input": str, "header": bool, "family": str, "rank": int, "qe": float, "qg": float,
    "center": bool, "accelerate": bool, "eta": float, "max_backtracks": int,
    "warm_start": bool, "screen": bool, "screen_a": float, "screen_mode": str, "starts": int,
    "survivors": int, "warmup": int, "step": str, "tau": float, "init": str,
    "max_outer": int, "max_inner": int, "tol_outer": float, "tol_inner": float, "seed": int,
    "jobs": int, "emit_theta": bool, "out": str,
}


def solver_config(opts, family) -> SolverConfig:
    if opts.screen:
        q = opts.qg if opts.qg is not None else 1.0
        sparsity = SparsityLevel(q, GROUP)
    elif opts.qe is not None and opts.qg is not None:
        raise ConfigError("give --qe or --qg, not both (both are allowed only with --screen)")
    elif opts.qg is not None:
        sparsity = SparsityLevel(opts.qg, GROUP)
    else:
        sparsity = SparsityLevel(1.0 if opts.qe is None else opts.qe, ELEMENT)
    step = opts.step
    if step is None:
        step = FIXED if opts.tau is not None else (
            UNIVERSAL if family.universal_step() is not None else LINE_SEARCH)
    return SolverConfig(
        r=opts.rank, sparsity=sparsity, max_outer=opts.max_outer, max_inner=opts.max_inner,
        tol_outer=opts.tol_outer, tol_inner=opts.tol_inner, step_policy=step, tau=opts.tau,
        eta=opts.eta, max_backtracks=opts.max_backtracks, seed=opts.seed,
    )


def make_fit_fn(opts, cfg: SolverConfig):
    """Solver with the signature expected by :func:`multi_start_fit`."""
    acc = AccelConfig(eta=opts.eta, max_backtracks=opts.max_backtracks,
                      tau0=opts.tau, warm_start=opts.warm_start)
    if opts.screen:
        sched = ScreenSchedule(a=opts.screen_a, t_mode=opts.screen_mode)
        refit = opts.qe

        def run(data, family, c, init):
            return fit_progressive(data, family, c, acc, sched, init,
                                   accelerate=opts.accelerate, refit_q_e=refit)
        return run
    if opts.accelerate:
        return lambda data, family, c, init: fit_accelerated(data, family, c, acc, init)
    return fit


def svd_init(data: MaskedMatrix, family, r: int) -> FactorModel:
    """Leading singular vectors of the column-centred data (missing cells at the mean)."""
    means = data.column_means()
    centred = np.where(data.observed, data.values - means, 0.0)
    U, sig, Wt = np.linalg.svd(centred, full_matrices=False)
    alpha = default_alpha(data, family)
    if alpha is None:
        alpha = np.zeros(data.p)
    return FactorModel(alpha, U[:, :r], Wt[:r].T * sig[:r])


def run_fit(data: MaskedMatrix, family, cfg: SolverConfig, opts) -> FitReport:
    fit_fn = make_fit_fn(opts, cfg)
    if opts.init == "svd":
        return fit_fn(data, family, cfg, svd_init(data, family, cfg.r))
    try:
        ms = start_config(opts, family)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return multi_start_fit(data, family, cfg, ms, fit_fn, n_jobs=opts.jobs)


def start_config(opts, family) -> MultiStartConfig:
    if opts.starts is None:
        ms = MultiStartConfig.for_family(family, seed=opts.seed, n1=opts.warmup)
        if opts.survivors is not None:
            ms = MultiStartConfig(ms.m1, opts.survivors, opts.warmup, opts.seed)
    else:
        m2 = opts.survivors if opts.survivors is not None else min(opts.starts, 1)
        ms = MultiStartConfig(opts.starts, m2, opts.warmup, opts.seed)
    return ms


def cmd_fit(parser, args) -> int:
    opts = Options(parser, args, FIT_DEFAULTS, FIT_TYPES)
    for key in ("input", "family", "rank", "out"):
        if getattr(opts, key) is None:
            parser.error(f"--{key} is required (on the command line or in --config)")
    family = get_family(opts.family)
    if opts.init not in ("random", "svd"):
        raise ConfigError(f"--init must be random or svd, got {opts.init!r}")
    if opts.center and family.name != "gaussian":
        raise ConfigError("--center is only meaningful for the gaussian family")
    try:
        cfg = solver_config(opts, family)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    raw = read_input(opts.input, opts.header)
    try:
        family.check_data(raw.values, raw.observed)
    except DomainError as exc:
        raise DataError(f"{opts.input}: {exc}") from None
    data, means = raw.centered() if opts.center else (raw, np.zeros(raw.p))

    start = time.perf_counter()
    report = run_fit(data, family, cfg, opts)
    wall = time.perf_counter() - start

    model = report.model
    if opts.center:
        model = FactorModel(model.alpha + means, model.V, model.S)
    out = Path(opts.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "alpha.csv", model.alpha)
    write_matrix(out / "V.csv", model.V)
    write_matrix(out / "S.csv", model.S)
    if opts.emit_theta:
        write_matrix(out / "theta.csv", model.theta())
    write_table(out / "objective_trace.csv", ["iteration", "objective"],
                [[i, float(f)] for i, f in enumerate(report.objective_trace)])
    if cfg.sparsity.mode == GROUP and not (opts.screen and opts.qe is not None):
        write_table(out / "support.csv", ["row"], [[int(i)] for i in report.support])
    else:
        pairs = np.argwhere(model.S != 0)
        write_table(out / "support.csv", ["row", "col"], [[int(i), int(j)] for i, j in pairs])
    params = dict(opts.values)
    params["input"] = str(opts.input)
    params["out"] = str(opts.out)
    params["step"] = cfg.step_policy
    params["family"] = family.name
    manifest = {
        "subcommand": "fit",
        "version": __version__,
        "params": params,
        "input_sha256": sha256(opts.input),
        "seed": opts.seed,
        "status": report.status,
        "iterations": report.iterations,
        "objective": report.objective,
        "wall_time": wall,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if report.status in ("line_search_failed", "diverged"):
        log.error("numerical failure: %s after %d iterations", report.status, report.iterations)
        return EXIT_NUMERIC
    return EXIT_OK


def read_input(path, header: bool) -> MaskedMatrix:
    try:
        return read_csv(path, header=header)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    except ValueError as exc:
        raise DataError(str(exc)) from None


# --------------------------------------------------------------------------
# simulation


def parse_lambdas(text: str | None, r_star: int):
    if text is None:
        return None
    try:
        vals = [float(v) for v in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse signal strengths {text!r}") from None
    if len(vals) == 1:
        vals = vals * r_star
    return tuple(vals)


def build_spec(args, seed: int):
    r_star = SETTINGS[args.setting][0]
    try:
        return setting_spec(args.setting, args.family, n=args.n, p=args.p, seed=seed,
                            missing_rate=args.missing,
                            lambdas=parse_lambdas(args.signal, r_star))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_simulate(parser, args) -> int:
    spec = build_spec(args, args.seed)
    try:
        X, truth = generate_data(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "X.csv", X.with_nan())
    write_matrix(out / "Theta.csv", truth.theta)
    write_matrix(out / "Q.csv", truth.Q)
    manifest = {
        "subcommand": "simulate",
        "version": __version__,
        "params": {"setting": args.setting, "family": spec.family, "n": spec.n, "p": spec.p,
                   "r_star": spec.r_star, "q_star": spec.q_star, "q_mode": spec.q_mode,
                   "lambdas": list(spec.strengths()), "missing_rate": spec.missing_rate},
        "seed": args.seed,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# evaluation


def cmd_eval(parser, args) -> int:
    fit_dir = Path(args.fit) if args.fit else None
    truth_dir = Path(args.truth) if args.truth else None

    def pick(explicit, directory, name):
        if explicit:
            return Path(explicit)
        if directory is None:
            parser.error(f"need --{name.split('.')[0].lower()} or a directory holding {name}")
        return directory / name

    S_hat = load_matrix(pick(args.S, fit_dir, "S.csv"))
    if args.theta or (fit_dir and (fit_dir / "theta.csv").exists()):
        theta_hat = load_matrix(pick(args.theta, fit_dir, "theta.csv"))
    elif fit_dir is not None:
        alpha = load_matrix(fit_dir / "alpha.csv").ravel()
        V = load_matrix(fit_dir / "V.csv")
        try:
            theta_hat = FactorModel(alpha, V, S_hat).theta()
        except ValueError as exc:
            raise DataError(f"inconsistent fit files: {exc}") from None
    else:
        parser.error("need --theta or --fit")
    theta_star = load_matrix(pick(args.truth_theta, truth_dir, "Theta.csv"))
    Q_star = load_matrix(pick(args.truth_Q, truth_dir, "Q.csv"))
    data = read_input(pick(args.data, truth_dir, "X.csv"), False)

    try:
        result = evaluate(data, args.family, theta_hat, S_hat, theta_star, Q_star,
                          mode=args.mode)
    except DomainError as exc:
        raise DataError(str(exc)) from None
    except ValueError as exc:
        raise DataError(f"cannot evaluate: {exc}") from None
    row = result.as_dict()
    if args.out:
        write_table(args.out, list(row), [list(row.values())])
    else:
        write_table(sys.stdout, list(row), [list(row.values())])
    return EXIT_OK


# --------------------------------------------------------------------------
# benchmark


BENCH_COLUMNS = ["setting", "family", "fit_family", "reps", "failed", "theta_error", "deviance",
                 "max_canonical_angle_deg", "miss_rate_pct", "false_positive_rate_pct", "time_s"]


def rep_seed(master: int, rep: int, key: str) -> int:
    ss = np.random.SeedSequence([int(master), zlib.crc32(key.encode()), rep])
    return int(ss.generate_state(1)[0])


def bench_levels(setting: str, q_star: float, qe, qg):
    """Sparsity used for fitting: q* for setting a, 4 q* for b, 2 q* for c."""
    mode = SETTINGS[setting][2]
    if qg is not None:
        return SparsityLevel(qg, GROUP)
    if qe is not None:
        return SparsityLevel(qe, ELEMENT)
    factor = {"a": 1, "b": 4, "c": 2}[setting]
    return SparsityLevel(min(1.0, factor * q_star), mode)


def bench_one(args, rep: int):
    spec = build_spec(args, rep_seed(args.seed, rep, "sim"))
    X, truth = generate_data(spec)
    fit_family = get_family(args.fit_family or spec.family)
    sparsity = bench_levels(args.setting, spec.q_star, args.qe, args.qg)
    opts = argparse.Namespace(
        eta=0.5, max_backtracks=10, tau=None, warm_start=False, screen=False,
        accelerate=args.accelerate or fit_family.universal_step() is None, qe=None,
    )
    step = UNIVERSAL if fit_family.universal_step() is not None else LINE_SEARCH
    cfg = SolverConfig(r=args.rank or spec.r_star, sparsity=sparsity, step_policy=step,
                       max_outer=args.max_outer)
    if args.starts is None:
        ms = MultiStartConfig.for_family(spec.family, seed=rep_seed(args.seed, rep, "fit"))
    else:
        ms = MultiStartConfig(args.starts, args.survivors or 1, 2, rep_seed(args.seed, rep, "fit"))
    start = time.perf_counter()
    report = multi_start_fit(X, fit_family, cfg, ms, make_fit_fn(opts, cfg))
    elapsed = time.perf_counter() - start
    result = evaluate(X, fit_family, report.model.theta(), report.model.S, truth.theta, truth.Q,
                      mode=sparsity.mode)
    return result, elapsed


def cmd_bench(parser, args) -> int:
    if not 0 <= args.trim < 0.5:
        raise ConfigError(f"--trim must lie in [0, 0.5), got {args.trim}")
    if args.reps < 1:
        raise ConfigError("--reps must be at least 1")
    build_spec(args, args.seed)  # validate before spending time

    def safe(rep):
        try:
            return bench_one(args, rep)
        except (DomainError, MultiStartError, ValueError, FloatingPointError) as exc:
            if isinstance(exc, ConfigError):
                raise
            log.warning("repetition %d failed: %s", rep, exc)
            return None

    reps = list(range(args.reps))
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(safe, reps))
    else:
        results = [safe(r) for r in reps]
    good = [r for r in results if r is not None]
    failed = len(results) - len(good)
    if args.per_rep:
        fields = list(EvalResult.__dataclass_fields__)
        rows = []
        for i, r in enumerate(results):
            if r is None:
                rows.append([i] + ["NA"] * (len(fields) + 1))
            else:
                rows.append([i, *r[0].as_dict().values(), r[1]])
        write_table(args.per_rep, ["rep", *fields, "time_s"], rows)
    if not good:
        log.error("all %d repetitions failed", len(results))
        return EXIT_NUMERIC

    def tm(values):
        return trimmed_mean(values, args.trim)

    fit_family = get_family(args.fit_family or args.family).name
    row = [
        args.setting, get_family(args.family).name, fit_family, len(results), failed,
        tm([r.theta_error for r, _ in good]),
        tm([r.deviance for r, _ in good]),
        tm([r.max_canonical_angle_deg for r, _ in good]),
        100 * tm([r.miss_rate for r, _ in good]),
        100 * tm([r.false_positive_rate for r, _ in good]),
        tm([t for _, t in good]),
    ]
    write_table(args.out or sys.stdout, BENCH_COLUMNS, [row])
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgpca", description="Sparse generalized PCA for exponential-family data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a sparse low-rank model to a CSV matrix",
                       argument_default=None)
    f.add_argument("input", nargs="?", help="numeric CSV; empty/NA/NaN cells are missing")
    f.add_argument("--config", help="key = value file or a JSON manifest from a previous fit")
    f.add_argument("--header", action="store_true", default=None, help="skip the first line")
    f.add_argument("--family", choices=["gaussian", "bernoulli", "poisson", "gamma"])
    f.add_argument("--rank", type=int, help="number of components r")
    f.add_argument("--qe", type=float, help="fraction of nonzero loading entries")
    f.add_argument("--qg", type=float, help="fraction of nonzero loading rows")
    f.add_argument("--center", action="store_true", default=None,
                   help="centre columns first (gaussian only); means are added back to alpha")
    f.add_argument("--accelerate", action="store_true", default=None,
                   help="accelerated solver with backtracking")
    f.add_argument("--eta", type=float, help="backtracking factor in (0, 1)")
    f.add_argument("--max-backtracks", type=int)
    f.add_argument("--warm-start", action="store_true", default=None,
                   help="start each line search from the last accepted step")
    f.add_argument("--screen", action="store_true", default=None,
                   help="progressive screening down to --qg of the columns")
    f.add_argument("--screen-a", type=float, help="screening decay rate in [0.01, 0.1]")
    f.add_argument("--screen-mode", choices=["outer", "inner", "product"])
    f.add_argument("--starts", type=int, help="number of random starts m1")
    f.add_argument("--survivors", type=int, help="starts kept after the warm-up m2")
    f.add_argument("--warmup", type=int, help="warm-up iterations n1")
    f.add_argument("--step", choices=[UNIVERSAL, FIXED, LINE_SEARCH])
    f.add_argument("--tau", type=float, help="fixed (or initial) step size")
    f.add_argument("--init", choices=["random", "svd"])
    f.add_argument("--max-outer", type=int)
    f.add_argument("--max-inner", type=int)
    f.add_argument("--tol-outer", type=float)
    f.add_argument("--tol-inner", type=float)
    f.add_argument("--seed", type=int)
    f.add_argument("--jobs", type=int, help="threads for the random starts")
    f.add_argument("--emit-theta", action="store_true", default=None,
                   help="also write the natural-parameter matrix")
    f.add_argument("--out", help="output directory")
    f.set_defaults(handler=cmd_fit, subparser=f)

    s = sub.add_parser("simulate", help="draw a synthetic data set")
    add_sim_args(s)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(handler=cmd_simulate, subparser=s)

    e = sub.add_parser("eval", help="score a fit against the truth")
    e.add_argument("--fit", help="fit output directory")
    e.add_argument("--truth", help="simulate output directory")
    e.add_argument("--theta", help="estimated natural parameters (n x p)")
    e.add_argument("--S", help="estimated loadings (p x r)")
    e.add_argument("--truth-theta", help="true natural parameters")
    e.add_argument("--truth-Q", help="true loadings")
    e.add_argument("--data", help="observed data CSV (for the deviance)")
    e.add_argument("--family", choices=["gaussian", "bernoulli", "poisson", "gamma"],
                   required=True)
    e.add_argument("--mode", choices=[ELEMENT, GROUP], default=ELEMENT,
                   help="support notion for miss and false-positive rates")
    e.add_argument("--out", help="write the CSV row here instead of stdout")
    e.set_defaults(handler=cmd_eval, subparser=e)

    b = sub.add_parser("bench", help="repeat simulate, fit and eval; report trimmed means")
    add_sim_args(b)
    b.add_argument("--fit-family", choices=["gaussian", "bernoulli", "poisson"],
                   help="family used for fitting (default: the data family)")
    b.add_argument("--rank", type=int, help="fitted rank (default: the true rank)")
    b.add_argument("--qe", type=float)
    b.add_argument("--qg", type=float)
    b.add_argument("--accelerate", action="store_true")
    b.add_argument("--starts", type=int)
    b.add_argument("--survivors", type=int)
    b.add_argument("--max-outer", type=int, default=500)
    b.add_argument("--reps", type=int, default=20)
    b.add_argument("--trim", type=float, default=0.1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--per-rep", help="also write one row per repetition here")
    b.add_argument("--out", help="write the summary row here instead of stdout")
    b.set_defaults(handler=cmd_bench, subparser=b)
    return parser


def add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--setting", choices=sorted(SETTINGS), default="a")
    p.add_argument("--family", choices=["gaussian", "bernoulli", "poisson"], default="gaussian")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=int, default=200)
    p.add_argument("--missing", type=float, default=0.0, help="missing-cell rate")
    p.add_argument("--signal", help="signal strength(s), one value or a comma list")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.handler(args.subparser, args)
    except ConfigError as exc:
        print(f"sgpca {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, DomainError) as exc:
        print(f"sgpca {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except MultiStartError as exc:
        print(f"sgpca {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
