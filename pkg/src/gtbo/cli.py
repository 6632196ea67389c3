"""Command-line entry point: run, sweep, plot, validate-config.

Exit codes: 0 on success, 2 for configuration or missing-input errors,
3 for evaluator failures (partial outputs are left on disk).
"""

from __future__ import annotations

import argparse
import logging
import sys

from gtbo.config import ConfigError, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EVALUATOR = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtbo",
        description="Group-testing Bayesian optimization experiment runner",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run all configured seeds")
    p_run.add_argument("--config", required=True, help="path to a TOML run config")

    p_sweep = sub.add_parser("sweep", help="run the configured sensitivity sweep")
    p_sweep.add_argument("--config", required=True, help="path to a TOML run config")

    p_plot = sub.add_parser("plot", help="render an SVG report from run artifacts")
    p_plot.add_argument("results_dir", help="directory with seed_* subdirs or sweep.csv")
    p_plot.add_argument(
        "--kind",
        required=True,
        choices=("marginals", "regret", "sensitivity", "active_count"),
    )

    p_val = sub.add_parser("validate-config", help="parse and validate a config file")
    p_val.add_argument("--config", required=True, help="path to a TOML run config")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "validate-config":
        try:
            load_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print("config ok")
        return EXIT_OK

    if args.command in ("run", "sweep"):
        try:
            config = load_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        from gtbo.runner import run_experiment, run_sweep

        try:
            if args.command == "run":
                summaries = run_experiment(config)
                print(f"completed {len(summaries)} seed(s) in {config.output_dir}")
            else:
                if config.sweep is None:
                    print("config error: sweep requires a [sweep] block", file=sys.stderr)
                    return EXIT_CONFIG
                path = run_sweep(config)
                print(f"sweep written to {path}")
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except Exception as exc:  # evaluator or runtime failure; outputs may be partial
            print(f"run failed: {exc}", file=sys.stderr)
            return EXIT_EVALUATOR
        return EXIT_OK

    if args.command == "plot":
        from gtbo.plots import render

        try:
            out = render(args.results_dir, args.kind)
        except (FileNotFoundError, ValueError) as exc:
            print(f"input error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"wrote {out}")
        return EXIT_OK

    return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
