"""Command-line interface: run, validate, gen-synth.

Exit codes: 0 success, 1 configuration error, 2 runtime error. Each failure
prints a single diagnostic line to stderr. The output directory can be
overridden with --out or the INCOMENOWCAST_OUT environment variable.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import io
from .errors import (
    AlignmentError,
    ConfigError,
    ConvergenceError,
    DataError,
    IndexationError,
)
from .pipeline import load_config, prepare_world, run_pipeline, validate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="incomenowcast",
        description=(
            "Nowcast a household income distribution under a labour-market "
            "shock and decompose the change into income-shock and "
            "policy-response effects."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline for a config")
    run.add_argument("--config", required=True, help="run-config JSON path")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--out", help="override the output directory")
    run.add_argument(
        "--months", help="comma-separated analysis months (YYYY-MM) overriding the config"
    )

    val = sub.add_parser("validate", help="check a config without computing")
    val.add_argument("--config", required=True)

    gen = sub.add_parser(
        "gen-synth", help="write the synthetic survey, panel and payroll CSVs"
    )
    gen.add_argument("--config", required=True)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", help="directory for the generated files")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    out = getattr(args, "out", None) or os.environ.get("INCOMENOWCAST_OUT")
    if out:
        overrides["out"] = out
    months = getattr(args, "months", None)
    if months:
        overrides["months"] = [m.strip() for m in months.split(",") if m.strip()]
    return overrides


def _cmd_run(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    findings = validate(cfg)
    if findings:
        for finding in findings:
            print(f"error: config: {finding}", file=sys.stderr)
        return EXIT_CONFIG
    out = run_pipeline(cfg)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    findings = validate(cfg)
    for finding in findings:
        print(finding)
    if not findings:
        print("config ok")
    return EXIT_OK if not findings else EXIT_CONFIG


def _cmd_gen_synth(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    if cfg.synth is None:
        print("error: config: no synth block in config", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(getattr(args, "out", None) or os.environ.get("INCOMENOWCAST_OUT") or cfg.output_dir)
    world = prepare_world(cfg)
    io.write_sample(
        world.survey, out / "survey_persons.csv", out / "survey_households.csv"
    )
    for month, wave in sorted(world.waves.items()):
        io.write_sample(
            wave, out / f"panel_{month}_persons.csv", out / f"panel_{month}_households.csv"
        )
    io.write_payroll(world.payroll, out / "payroll.csv")
    print(f"wrote {out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "gen-synth": _cmd_gen_synth,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, IndexationError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except AlignmentError as exc:
        print(f"error: alignment: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ConvergenceError as exc:
        print(f"error: convergence: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except RuntimeError as exc:
        print(f"error: runtime: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
