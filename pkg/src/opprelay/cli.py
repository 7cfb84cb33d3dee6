"""Command-line front end: validate a scenario config, run it, write results.

Exit codes: 0 success, 1 config error, 2 numeric/precision error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .dmt import InsufficientTrialsError
from .experiments import ConfigError, emit_csv, parse_config, run_experiment
from .orderstats import QuadratureError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opprelay",
        description="Run an opportunistic-relaying experiment from a YAML config.")
    parser.add_argument("--config", required=True, help="path to the scenario YAML file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the seed from the config file")
    parser.add_argument("--out", default=None,
                        help="output CSV path (overrides config 'out')")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads; results do not depend on this")
    parser.add_argument("--validate-only", action="store_true",
                        help="check the config and exit without computing")
    parser.add_argument("--no-plot", action="store_true",
                        help="skip rendering the companion figure")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        print(f"config error: cannot read {args.config!r}: {exc}", file=sys.stderr)
        return 1
    except yaml.YAMLError as exc:
        print(f"config error: invalid YAML in {args.config!r}: {exc}", file=sys.stderr)
        return 1

    if args.seed is not None:
        if not isinstance(doc, dict):
            print("config error: top level must be a mapping", file=sys.stderr)
            return 1
        doc = dict(doc)
        doc["seed"] = args.seed

    try:
        cfg = parse_config(doc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.validate_only:
        print(f"config OK: {cfg.kind} experiment, seed {cfg.seed}, hash {cfg.config_hash}")
        return 0

    out = args.out or cfg.out
    if out is None:
        print("config error: no output path; set 'out' in the config or pass --out",
              file=sys.stderr)
        return 1
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return 1

    try:
        table = run_experiment(cfg, threads=args.threads)
    except (QuadratureError, InsufficientTrialsError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        if isinstance(exc, InsufficientTrialsError):
            print("hint: increase the 'trials' setting for the failing points",
                  file=sys.stderr)
        return 2

    out_path = Path(out)
    if out_path.parent and not out_path.parent.exists():
        out_path.parent.mkdir(parents=True, exist_ok=True)
    emit_csv(table, out_path)
    print(f"{cfg.kind}: {len(table.rows)} rows -> {out_path}")
    for w in table.metadata.get("warnings", []):
        print(f"warning: {w}", file=sys.stderr)

    if not args.no_plot:
        from .plots import render_table
        fig_path = out_path.with_suffix(".png")
        render_table(table, fig_path)
        print(f"figure -> {fig_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
