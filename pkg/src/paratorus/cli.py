"""Command-line interface.

Subcommands map onto the experiment runners; every run writes a report
(JSON and/or CSV) plus figures into --out.  Exit codes: 0 all measured
assertions passed, 1 an assertion failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config, validate_config, with_overrides
from .grid import PreconditionError, field_to_json
from .harness import (
    apply_command,
    coeffs_command,
    run_experiment,
    write_report,
)

_COMMAND_KINDS = {
    "verify-leibniz": ("leibniz", "leibniz_cm", "hardy_leibniz"),
    "verify-nikolskij": ("nikolskij",),
    "scatter": ("scattering",),
    "lemmas": ("lemma_suite",),
    "norm": ("norm_bench",),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paratorus",
        description="Dyadic-analysis experiment harness on the periodic torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--seed", type=int, help="override the campaign seed")
    common.add_argument("--grid", type=int, help="override the grid size")
    common.add_argument("--dim", type=int, choices=(1, 2), help="override the dimension")
    common.add_argument("--out", default="out", help="report directory")
    common.add_argument("--format", choices=("json", "csv", "both"), default="both")
    common.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    for name, help_text in (
        ("verify-leibniz", "bilinear Leibniz-type ratio campaign"),
        ("verify-nikolskij", "band-limited assembly bound campaign"),
        ("scatter", "dispersive-limit simulation and estimates"),
        ("lemmas", "pointwise and series lemma suite"),
        ("norm", "norm battery over random fields"),
    ):
        sub.add_parser(name, parents=[common], help=help_text)

    ap = sub.add_parser(name="apply", parents=[common],
                        help="apply the configured symbol to a field pair")
    ap.add_argument("--field", help="JSON field file (first input)")
    ap.add_argument("--field2", help="JSON field file (second input)")

    sub.add_parser("coeffs", parents=[common],
                   help="paraproduct coefficient tables for the configured symbol")
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.config is None:
        validate_config(cfg)
    cfg = with_overrides(cfg, seed=args.seed, size=args.grid, dim=args.dim)
    kinds = _COMMAND_KINDS.get(args.command)
    if kinds is not None and cfg.kind not in kinds:
        from dataclasses import replace

        cfg = replace(cfg, kind=kinds[0])
        validate_config(cfg)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    figures = not args.no_figures
    try:
        if args.command == "apply":
            report, result = apply_command(cfg, args.field, args.field2)
            paths = write_report(report, args.out, args.format, figures, basename="apply")
            fpath = Path(args.out) / "apply_result.json"
            with open(fpath, "w") as fh:
                json.dump(field_to_json(result), fh, indent=2, sort_keys=True)
            paths["result"] = str(fpath)
            if figures:
                from .plots import field_figure

                paths.setdefault("figures", []).append(
                    field_figure(result, Path(args.out) / "apply_field.png",
                                 title=f"symbol {report['symbol']}")
                )
        elif args.command == "coeffs":
            report, _ = coeffs_command(cfg)
            paths = write_report(report, args.out, args.format, figures, basename="coeffs")
        else:
            report = run_experiment(cfg)
            paths = write_report(report, args.out, args.format, figures)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    passed = bool(report.get("passed", False))
    summary = report.get("summary", {})
    line = f"{'PASS' if passed else 'FAIL'} {report['kind']}"
    if "max" in summary:
        line += f" max_ratio={summary['max']:.6g} trials={cfg.trials}"
    if "skipped" in summary:
        line += f" skipped={summary['skipped']}"
    if "failure_count" in summary:
        line += f" failures={summary['failure_count']}"
    print(line)
    for key, val in sorted(paths.items()):
        print(f"  {key}: {val}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
