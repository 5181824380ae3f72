"""Command-line runner: ``pielm run``, ``pielm table`` and ``pielm rates``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys

from .config import ConfigError, parse_config
from .experiments import TABLES, reproduce_table, run_experiment, run_rates, write_rows

log = logging.getLogger("pielm")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="YAML config file")
    p.add_argument("--problem", choices=["heat", "black_scholes", "heston"])
    p.add_argument("--dim", type=int, help="spatial dimension d")
    p.add_argument("--width", type=int, help="number of random features N")
    p.add_argument("--activation", choices=["tanh", "sigmoid"])
    p.add_argument("--backend", choices=["analytic", "fd"])
    p.add_argument("--solver", choices=["svd", "qr"])
    p.add_argument("--n-test", type=int, dest="n_test")
    for name in ("weights", "collocation", "boundary-mc", "test", "oracle"):
        p.add_argument(f"--seed-{name}", type=int, dest=f"seed_{name.replace('-', '_')}")


def _overrides(args) -> dict:
    return {
        "problem": args.problem,
        "d": args.dim,
        "width": args.width,
        "activation": args.activation,
        "backend": args.backend,
        "solver": args.solver,
        "n_test": args.n_test,
        "seeds": {
            "weights": args.seed_weights,
            "collocation": args.seed_collocation,
            "boundary_mc": args.seed_boundary_mc,
            "test": args.seed_test,
            "oracle": args.seed_oracle,
        },
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pielm", description="Physics-informed extreme learning machines")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a single configuration")
    _add_config_flags(run)
    run.add_argument("--out", metavar="PATH", help="CSV output (default: stdout)")

    table = sub.add_parser("table", help="run every row of a results grid")
    table.add_argument("table_id", choices=sorted(TABLES))
    table.add_argument("--scale", choices=["full", "desk"], default="desk")
    table.add_argument("--n-test", type=int, dest="n_test")
    table.add_argument("--out", metavar="PATH", help="CSV output (default: stdout)")

    rates = sub.add_parser("rates", help="error-vs-width study")
    _add_config_flags(rates)
    rates.add_argument("--widths", type=lambda s: [int(w) for w in s.split(",")], default=[800, 1600, 3200])
    rates.add_argument("--repeats", type=int, default=1)
    rates.add_argument("--out", metavar="PATH", help="CSV output (default: stdout)")
    return parser


def _emit(rows, out, columns=None) -> None:
    if out:
        if columns is None:
            write_rows(rows, out)
        else:
            with open(out, "w", newline="", encoding="utf-8") as fh:
                w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
                w.writeheader()
                w.writerows(rows)
        return
    from .experiments import CSV_COLUMNS

    w = csv.DictWriter(sys.stdout, fieldnames=columns or CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "table":
            rows = reproduce_table(args.table_id, args.scale, n_test=args.n_test)
            _emit(rows, args.out)
            return 0
        cfg = parse_config(args.config, _overrides(args))
        if args.command == "run":
            rows = []
            for r in range(cfg.repeats):
                _, row = run_experiment(cfg.for_repeat(r))
                row["row"] = r
                rows.append(row)
            _emit(rows, args.out)
        else:
            rows, slope = run_rates(cfg, args.widths, args.repeats)
            _emit(rows, args.out, ["width", "median", "iqr", "errors"])
            print(f"slope: {slope if slope is not None else 'n/a'}", file=sys.stderr)
    except ConfigError as exc:
        print(f"pielm: config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"pielm: {exc}", file=sys.stderr)
        return 2
    except (FloatingPointError, ArithmeticError, ValueError) as exc:
        print(f"pielm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
