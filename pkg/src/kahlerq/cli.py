"""Command line entry point: ``kahlerq run | plot | schema``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigError, MissingReport, SearchSpaceTooLarge
from .runner import config_schema, emit_plot_data, load_config, run_experiment

log = logging.getLogger("kahlerq")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or config.output_dir or Path("kahlerq-out") / Path(args.config).stem
    try:
        report = run_experiment(config, out, threads=args.threads)
    except SearchSpaceTooLarge as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for check in report["checks"]:
        status = "PASS" if check["pass"] else "FAIL"
        log.info("%s  %s  %s %s %s", status, check["name"], check["residual"], check["relation"], check["tolerance"])
    print(f"{'PASS' if report['pass'] else 'FAIL'}: {len(report['checks'])} checks, report in {out}")
    return EXIT_OK if report["pass"] else EXIT_CHECK_FAILED


def _cmd_plot(args) -> int:
    try:
        files = emit_plot_data(args.report_dir)
    except MissingReport as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in files:
        print(f)
    return EXIT_OK


def _cmd_schema(args) -> int:
    print(json.dumps(config_schema(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kahlerq", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log every check")
    # accept -v after the subcommand as well, without clobbering a leading one
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help="log every check")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run an experiment config and write report.json")
    run.add_argument("config", help="path to a JSON experiment config")
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument("--threads", type=int, default=1, help="worker threads for independent checks")
    run.set_defaults(func=_cmd_run)

    plot = sub.add_parser("plot", parents=[common], help="write gnuplot data files from a report directory")
    plot.add_argument("report_dir", type=Path)
    plot.set_defaults(func=_cmd_plot)

    schema = sub.add_parser("schema", parents=[common], help="print the config JSON schema")
    schema.set_defaults(func=_cmd_schema)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "threads", 1) < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
