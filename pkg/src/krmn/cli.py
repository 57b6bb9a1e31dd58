"""Command-line entry point: ``krmn {run,noise,ecr-check,bound,recipes,version}``.

Exit status: 0 on success, 1 on a config or argument error, 2 when every
trial of an experiment diverged.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import run_ecr_check, stepsize_bound, stepsize_bound_eig
from .bench import ExperimentDiverged, run_experiment
from .config import ConfigError, load_config
from .kernels import LINEAR, POLY2
from .noise import RNG_ALGORITHM, BgParams, SasParams, SeededStream, sample_bg, sample_sas, snr_to_dispersion
from .output import atomic_write, curve_csv, table_csv, write_metadata
from .recipes import validate_recipes

OUTPUT_ENV = "KRMN_OUTPUT_DIR"
MAPS = {"linear": LINEAR, "poly2": POLY2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _output_dir(arg) -> Path:
    out = Path(arg or os.environ.get(OUTPUT_ENV) or "results")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"output directory '{out}' is not writable: {exc.strerror or exc}") from None
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory '{out}' is not writable")
    return out


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        atomic_write(path, text)
    except OSError as exc:
        raise UsageError(f"cannot write output file '{path}': {exc.strerror or exc}") from None


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    experiments = cfg.experiments(full_scale=args.full_scale)
    if args.only:
        missing = sorted(set(args.only) - set(experiments))
        if missing:
            raise ConfigError(f"unknown filter name(s) {missing}; config defines {sorted(experiments)}")
        experiments = {k: v for k, v in experiments.items() if k in args.only}
    out_dir = _output_dir(args.out_dir) / cfg.name

    # run everything first so a failure never leaves a half-written result set
    finished, failed = {}, []
    for name, exp in experiments.items():
        t0 = time.perf_counter()
        try:
            curve = run_experiment(exp, workers=args.workers)
        except ExperimentDiverged as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            failed.append(name)
            continue
        finished[name] = (curve, time.perf_counter() - t0)

    out_dir.mkdir(parents=True, exist_ok=True)
    for name, (curve, wall) in finished.items():
        exp = experiments[name]
        csv_path = out_dir / f"{name}.csv"
        atomic_write(csv_path, curve_csv(curve))
        write_metadata(
            out_dir / f"{name}.meta.json",
            {
                "config": str(args.config),
                "config_sha256": cfg.digest(),
                "filter": name,
                "algorithm": exp.filter.algorithm,
                "seed": exp.seed,
                "rng": RNG_ALGORITHM,
                "train_len": exp.train_len,
                "test_len": exp.test_len,
                "trials": exp.trials,
                "diverged_trials": len(curve.diverged_trials),
                "diverged_trial_ids": curve.diverged_trials,
                "full_scale": bool(args.full_scale),
                "wall_clock_s": round(wall, 3),
                "version": __version__,
            },
        )
        print(f"{csv_path}  steady-state MSE {curve.steady_state_mse():.6g}  diverged {len(curve.diverged_trials)}/{exp.trials}")
    return 2 if failed else 0


def cmd_noise(args) -> int:
    stream = SeededStream(args.seed, args.stream_id)
    if args.model == "bg":
        params = BgParams(args.impulse_prob, args.sigma_impulse, args.sigma_gauss)
        x = np.asarray(sample_bg(params, stream, args.count))
    else:
        if (args.dispersion is None) == (args.snr_db is None):
            raise UsageError("sas noise needs exactly one of --dispersion or --snr-db")
        m = args.dispersion if args.dispersion is not None else snr_to_dispersion(args.snr_db, args.input_variance)
        params = SasParams(args.alpha, m)
        x = np.asarray(sample_sas(params, stream, args.count))
    _emit(table_csv("index,value", enumerate(x)), args.output)
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    stats = [("count", x.size), ("mean", x.mean()), ("std", x.std(ddof=1) if x.size > 1 else 0.0),
             ("median", med), ("q1", q1), ("q3", q3), ("min", x.min()), ("max", x.max())]
    sys.stderr.write(table_csv("statistic,value", stats))
    return 0


def cmd_ecr(args) -> int:
    records = run_ecr_check(steps=args.steps, kind=MAPS[args.map], input_dim=args.input_dim, seed=args.seed,
                            mu=args.mu, epsilon_u=args.epsilon_u)
    rows = [(i + 1, r.e_a, r.e_p, r.kappa, r.beta_q, r.residual) for i, r in enumerate(records)]
    _emit(table_csv("step,e_a,e_p,kappa,beta_q,residual", rows), args.output)
    worst = max(r.residual for r in records)
    print(f"max residual {worst:.3e} over {len(records)} steps", file=sys.stderr)
    return 0


def cmd_bound(args) -> int:
    if (args.trace_r is None) == (args.lambda_max is None):
        raise UsageError("give exactly one of --trace-r or --lambda-max")
    try:
        if args.trace_r is not None:
            value = stepsize_bound(args.lam, args.sigma_e, args.trace_r)
        else:
            value = stepsize_bound_eig(args.lam, args.sigma_e, args.lambda_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(repr(value))
    return 0


def cmd_recipes(args) -> int:
    report = validate_recipes(train_len=args.train_len, trials=args.trials)
    print("\n".join(report.lines()))
    return 0 if report.ok else 1


def cmd_version(args) -> int:
    print(f"krmn {__version__} ({RNG_ALGORITHM})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="krmn", description="Kernel robust mixed-norm adaptive filters and benchmarks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run every filter of an experiment config")
    r.add_argument("config")
    r.add_argument("--out-dir", help=f"output directory (default ${OUTPUT_ENV} or ./results)")
    r.add_argument("--full-scale", action="store_true", help="use the config's full_scale sizes")
    r.add_argument("--workers", type=int, default=1, help="processes for Monte Carlo trials")
    r.add_argument("--only", nargs="+", metavar="NAME", help="run only these filters")
    r.set_defaults(func=cmd_run)

    n = sub.add_parser("noise", help="draw impulsive-noise samples as CSV")
    n.add_argument("model", choices=("bg", "sas"))
    n.add_argument("--count", type=int, default=1000)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--stream-id", type=int, default=0)
    n.add_argument("--impulse-prob", type=float, default=0.2)
    n.add_argument("--sigma-impulse", type=float, default=0.02)
    n.add_argument("--sigma-gauss", type=float, default=0.02)
    n.add_argument("--alpha", type=float, default=1.4)
    n.add_argument("--dispersion", type=float)
    n.add_argument("--snr-db", type=float)
    n.add_argument("--input-variance", type=float, default=1.0)
    n.add_argument("-o", "--output")
    n.set_defaults(func=cmd_noise)

    e = sub.add_parser("ecr-check", help="per-step energy-balance residuals as CSV")
    e.add_argument("--map", choices=sorted(MAPS), default="poly2")
    e.add_argument("--steps", type=int, default=500)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--input-dim", type=int, default=3)
    e.add_argument("--mu", type=float, default=0.1)
    e.add_argument("--epsilon-u", type=float, default=0.3)
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_ecr)

    b = sub.add_parser("bound", help="mean-convergence step-size limit")
    b.add_argument("--lambda", dest="lam", type=float, required=True)
    b.add_argument("--sigma-e", type=float, required=True)
    b.add_argument("--trace-r", type=float)
    b.add_argument("--lambda-max", type=float)
    b.set_defaults(func=cmd_bound)

    v = sub.add_parser("recipes", help="run every shipped figure config")
    v.add_argument("--train-len", type=int)
    v.add_argument("--trials", type=int)
    v.set_defaults(func=cmd_recipes)

    sub.add_parser("version", help="print the version").set_defaults(func=cmd_version)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"krmn: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"krmn: invalid argument: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
