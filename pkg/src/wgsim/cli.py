"""Command-line entry point: ``wgsim run|check|budget|sweep|compare-models``.

Exit codes: 0 success, 1 a scenario expectation failed, 2 unreadable
input, parse error or configuration error.
"""

from __future__ import annotations

import argparse
import sys

from . import budget
from .dsl import parse_scenario
from .errors import ConfigError, ParseError
from .runner import compare_models, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _load(path):
    with open(path, encoding="utf-8") as f:
        return parse_scenario(f.read())


def _diag(path, err):
    if isinstance(err, ParseError):
        print(f"{path}:{err.line}:{err.column}: error: {err.message}", file=sys.stderr)
    else:
        print(f"{path}: error: {err}", file=sys.stderr)


def cmd_run(args) -> int:
    try:
        program = _load(args.scenario)
        report = run_scenario(program)
    except (OSError, ParseError, ConfigError, UnicodeDecodeError) as e:
        _diag(args.scenario, e)
        return EXIT_ERROR
    text = report.to_json() if args.json else report.to_text()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_check(args) -> int:
    try:
        program = _load(args.scenario)
    except (OSError, ParseError, ConfigError, UnicodeDecodeError) as e:
        _diag(args.scenario, e)
        return EXIT_ERROR
    p = program.platform
    print(f"{args.scenario}: ok ({len(p.harts)} harts, {len(p.anms)} anms, "
          f"{len(p.resources)} resources, {len(program.steps)} steps)")
    return EXIT_OK


def _print_rows(rows, as_csv):
    sys.stdout.write(budget.rows_to_csv(rows) if as_csv else budget.rows_to_table(rows))


def cmd_budget(args) -> int:
    try:
        if args.preset:
            if args.preset not in budget.PRESETS:
                raise ConfigError(f"unknown preset {args.preset!r} "
                                  f"(choose from {', '.join(budget.PRESETS)})")
            configs = budget.PRESETS[args.preset]
        else:
            with open(args.config, encoding="utf-8") as f:
                configs = [budget.parse_config(f.read())]
        rows = budget.sweep(configs)
    except (OSError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    _print_rows(rows, args.csv)
    return EXIT_OK


def cmd_sweep(args) -> int:
    configs = []
    try:
        for path in args.configs:
            with open(path, encoding="utf-8") as f:
                configs.append(budget.parse_config(f.read()))
        if not configs:
            configs = list(budget.FIG2)
        rows = budget.sweep(configs)
    except (OSError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    _print_rows(rows, args.csv)
    return EXIT_OK


def cmd_compare_models(args) -> int:
    try:
        result = compare_models(_load(args.scenario))
    except (OSError, ParseError, ConfigError, UnicodeDecodeError) as e:
        _diag(args.scenario, e)
        return EXIT_ERROR
    sys.stdout.write(result.to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wgsim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and report")
    p.add_argument("scenario")
    p.add_argument("--report", help="write the report here instead of stdout")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="parse and validate a scenario")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("budget", help="estimate WIDs for a preset or config file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", help="table2 or fig2")
    g.add_argument("--config", help="key-value configuration file")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("sweep", help="estimate WIDs for several config files (default: fig2)")
    p.add_argument("configs", nargs="*")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare-models", help="run a scenario on unified and separate SPMP")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_compare_models)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
