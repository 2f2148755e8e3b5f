"""Command line entry point: ``randstop {price,experiment,convergence,oracle}``.

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bench, oracle
from .errors import ConfigError, NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _int_list(text: str) -> list:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer, got {text}")
    return value


def _common(p: argparse.ArgumentParser, config_required: bool):
    p.add_argument("--config", required=config_required, help="key = value config file")
    p.add_argument("--seed", type=_u64, help="override base_seed")
    p.add_argument("--reps", type=int, help="override the number of repetitions")
    p.add_argument("--itm-only", action="store_true", help="regress on in-the-money paths only")
    p.add_argument("--threads", type=int, help=f"worker threads (default: ${bench.THREADS_ENV} or 1)")


def _output(p: argparse.ArgumentParser):
    p.add_argument("--out", help="result file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randstop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="run one configuration and print price and diagnostics")
    _common(p, config_required=False)
    p.add_argument("--algo", choices=bench.ALGOS)
    p.add_argument("--model", choices=sorted(bench.MODELS))
    p.add_argument("--payoff")
    p.add_argument("--strike", type=float)
    p.add_argument("--d", type=int, help="number of assets")
    p.add_argument("--x0", type=float)
    p.add_argument("--m", type=int, help="training paths (twice as many are simulated)")
    p.add_argument("--N", type=int, help="number of exercise dates")

    p = sub.add_parser("experiment", help="run a config file and write a result row")
    _common(p, config_required=True)
    _output(p)

    p = sub.add_parser("convergence", help="sweep training paths and hidden sizes")
    _common(p, config_required=True)
    _output(p)
    p.add_argument("--m-grid", type=_int_list, default=[2000, 8000, 32000])
    p.add_argument("--hidden-grid", type=_int_list, default=[5, 20, 100])

    p = sub.add_parser("oracle", help="Black-Scholes and binomial-tree reference prices")
    p.add_argument("--kind", choices=("call", "put"), default="put")
    p.add_argument("--x0", type=float, default=100.0)
    p.add_argument("--strike", type=float, default=100.0)
    p.add_argument("--r", type=float, default=0.02)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--N", type=int, default=10, help="exercise dates for the Bermudan price")
    p.add_argument("--steps-per-date", type=int, default=oracle.STEPS_PER_DATE)
    return parser


def _config(args) -> bench.ExperimentConfig:
    cfg = bench.load_config(args.config) if args.config else bench.ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if args.reps is not None:
        changes["repetitions"] = args.reps
    if args.itm_only:
        changes["itm_only"] = True
    if args.command == "price":
        for name in ("algo", "model", "payoff", "strike", "m", "N"):
            if getattr(args, name) is not None:
                changes[name] = getattr(args, name)
        params = {"d": args.d, "x0": args.x0}
        params = {k: v for k, v in params.items() if v is not None}
        if params:
            changes["model_params"] = {**cfg.model_params, **params}
        if "model" in changes and changes["model"] != cfg.model and "model_params" not in changes:
            changes["model_params"] = {}
    try:
        return cfg.replace(**changes)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _write(rows, args):
    if args.out is None:
        if args.format == "json":
            print(bench.to_json(rows))
        else:
            bench.write_csv(rows, sys.stdout)
    elif args.format == "json":
        bench.emit_json(rows, args.out)
    else:
        bench.emit_csv(rows, args.out)


def _cmd_price(args) -> None:
    cfg = _config(args)
    if args.reps is None:
        cfg = cfg.replace(repetitions=1)
    records = bench.run_records(cfg, args.threads)
    row = bench.summarize(cfg, records)
    print(f"{cfg.algo} {cfg.model} {cfg.payoff} d={row.d} N={row.N} m={row.m} K={row.K}")
    print(f"price            {row.price_mean:.6f}")
    if row.repetitions > 1:
        print(f"price std        {row.price_std:.6f}  over {row.repetitions} runs")
    print(f"pricing time     {row.runtime_median_s:.3f} s (median)")
    print(f"simulation time  {row.diagnostics['simulation_median_s']:.3f} s (median)")
    first = records[0].estimate
    stops = np.round(first.exercise_fraction, 4).tolist()
    print(f"stopping dates   {stops}  (fraction of evaluation paths at n = 1..N, run 0)")
    if first.iterations is not None:
        print(f"iterations       {[r.estimate.iterations for r in records]}")
    for note in row.diagnostics["warnings"]:
        print(f"warning          {note}")


def _cmd_experiment(args) -> None:
    _write([bench.run_experiment(_config(args), args.threads)], args)


def _cmd_convergence(args) -> None:
    cfg = _config(args)
    runs = args.reps if args.reps is not None else 20
    _write(bench.convergence_study(cfg, args.m_grid, args.hidden_grid, runs, args.threads), args)


def _cmd_oracle(args) -> None:
    european = oracle.bs_european(args.kind, args.x0, args.strike, args.r, args.sigma, args.T)
    bermudan = oracle.bermudan_oracle(
        args.kind, args.x0, args.strike, args.r, args.sigma, args.T, args.N, args.steps_per_date
    )
    print(f"european (closed form)  {european:.6f}")
    print(f"bermudan (tree, N={args.N})    {bermudan:.6f}")


COMMANDS = {
    "price": _cmd_price,
    "experiment": _cmd_experiment,
    "convergence": _cmd_convergence,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
