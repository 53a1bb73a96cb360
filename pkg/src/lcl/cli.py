"""Command-line entry point: run experiments, print stats, compute work ratios."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .graph import MatrixMarketError
from .harness import (ConfigError, compute_stats, csv_to_rows, parse_config,
                      ratio_rows_to_csv, rows_to_csv, run_experiment,
                      stats_to_csv, work_ratio_report)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"lcl: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
        rows = run_experiment(cfg)
    except ConfigError as exc:
        print(f"lcl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, MatrixMarketError, OSError) as exc:
        print(f"lcl: {exc}", file=sys.stderr)
        return EXIT_IO
    if not cfg.out:
        sys.stdout.write(rows_to_csv(rows))
    return EXIT_OK


def _cmd_stats(args) -> int:
    try:
        row = compute_stats(args.graph, unweighted=not args.weighted,
                            tree=args.tree, greedy_budget=args.greedy_budget)
    except ConfigError as exc:
        print(f"lcl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, MatrixMarketError, OSError) as exc:
        print(f"lcl: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(stats_to_csv(row))
    return EXIT_OK


def _cmd_ratio(args) -> int:
    try:
        rows = csv_to_rows(Path(args.input).read_text())
    except OSError as exc:
        print(f"lcl: cannot read csv: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"lcl: bad csv: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        ratios = work_ratio_report(rows, args.baseline)
    except ValueError as exc:
        print(f"lcl: {exc}", file=sys.stderr)
        return EXIT_IO
    text = ratio_rows_to_csv(ratios)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"lcl: cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcl",
        description="Laplacian cycle lab: cycle-space Kaczmarz solvers, "
                    "baselines, and a parallel-update simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment sweep from a config file")
    run.add_argument("--config", required=True, help="flat key=value config file")
    run.set_defaults(func=_cmd_run)

    stats = sub.add_parser("stats", help="print statistics of a graph")
    stats.add_argument("--graph", required=True,
                       help="grid2d:WxH, grid3d:WxHxD, or a Matrix Market file")
    stats.add_argument("--tree", default="degree-sum",
                       choices=["degree-sum", "h-tree", "bfs"])
    stats.add_argument("--greedy-budget", type=int, default=20)
    stats.add_argument("--weighted", action="store_true",
                       help="keep file weights instead of forcing 1")
    stats.set_defaults(func=_cmd_stats)

    ratio = sub.add_parser("ratio", help="work ratios of drk rows to a baseline")
    ratio.add_argument("--baseline", required=True, choices=["prk", "pcg"])
    ratio.add_argument("--in", dest="input", required=True, help="input CSV")
    ratio.add_argument("--out", default=None, help="output CSV (default stdout)")
    ratio.set_defaults(func=_cmd_ratio)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
