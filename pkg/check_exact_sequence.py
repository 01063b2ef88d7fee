#!/usr/bin/env python3
"""
Check the Dehn-twist exact triangle on finite models.

Subcommands
-----------
verify-les     build the filtered triple for (L, L0, L1), check conditions (I)-(V),
               the exact triple, the spectral collapse and the rank identities.
               `--scan` runs it over every slope triple within --max-slope.
local-check    numerical checks of the cotangent-bundle twist and the quadric model.
torus-scan     rank-level exact sequence and PL twist decomposition over slope triples.
report-render  re-render a saved JSON report as text (or its curves as SVG).

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 invalid input or config.
The report goes to stdout (or --out); diagnostics go to stderr.

Example
-------
python check_exact_sequence.py verify-les --config default.config.json --format json
python check_exact_sequence.py torus-scan --max-slope 6 --format json --jobs 4
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from config import ScenarioConfig, load_config, parse_curve
from errors import CheckFailed, ConfigError, InputError
from render.report import is_scan_doc, render_json, render_scan, render_text
from render.svg import render_configuration
from render.utils import set_curve_color_map
from scenario import (PASS, recheck_triple, run_exact_sequence, run_local_checks, scan_exact_sequences,
                      scan_failures, summarize_scan, torus_scan)

logger = logging.getLogger("check_exact_sequence")


def _configure_logging(verbose: bool) -> None:
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("[%(levelname)s] %(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Path to JSON config file for default options")
    common.add_argument("--max-slope", type=int, default=None, help="Bound on |p|, |q| for scans")
    common.add_argument("--epsilon", type=float, default=None, help="Action gap epsilon")
    common.add_argument("--delta", type=float, default=None, help="Wobbliness threshold delta in (0; 1/2)")
    common.add_argument("--twist-r", type=float, default=None, help="Twist profile parameter r in (0; 1/2)")
    common.add_argument("--seed", type=int, default=None, help="Seed for generated differentials and samples")
    common.add_argument("--format", choices=("text", "json"), default="text", help="Report format")
    common.add_argument("--svg", default=None, help="Write the curve configuration to this SVG file")
    common.add_argument("--jobs", type=int, default=None, help="Worker processes for scans")
    common.add_argument("--out", default=None, help="Write the report here instead of stdout")
    common.add_argument("--verbose", action="store_true", help="Debug logging on stderr")

    ap = argparse.ArgumentParser(description="Check the Dehn-twist exact triangle on finite models.")
    sub = ap.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify-les", parents=[common], help="Exact triple and long exact sequence for one triple")
    verify.add_argument("--scan", action="store_true",
                        help="Run over every ordered slope triple within --max-slope: 24 triples at 1, 336 at 2, "
                             "3360 at 3 (minutes on one worker; add --jobs)")
    sub.add_parser("local-check", parents=[common], help="Numerical checks of the local model")
    torus = sub.add_parser("torus-scan", parents=[common], help="Rank-level scan over slope triples")
    torus.add_argument("--pl-bound", type=int, default=4, help="Count PL twist crossings for slopes up to this bound")
    render = sub.add_parser("report-render", parents=[common], help="Re-render a saved JSON report")
    render.add_argument("report", help="Path to a JSON report written with --format json")
    return ap


def _scenario_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.from_mapping(load_config(args.config)) if getattr(args, "config", None) else ScenarioConfig()
    cfg = cfg.merged(max_slope=args.max_slope, epsilon=args.epsilon, delta=args.delta, twist_r=args.twist_r,
                     seed=args.seed, jobs=args.jobs)
    set_curve_color_map(dict(cfg.curve_colors))
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        logger.info("Report written to %s", out)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def cmd_verify_les(args, cfg: ScenarioConfig) -> int:
    if args.scan:
        df = scan_exact_sequences(cfg)
        summary = summarize_scan(df)
        _emit(render_scan(df, summary, args.format), args.out)
        return 0 if scan_failures(summary) == 0 else 1

    report = run_exact_sequence(cfg)
    if args.svg:
        render_configuration(cfg.L, cfg.L0, cfg.L1, args.svg, conv=cfg.twist_convention)
    _emit(render_json(report) if args.format == "json" else render_text(report), args.out)
    for failure in report["failures"]:
        logger.error("Check failed: %s", failure)
    return 0 if report["status"] == PASS else 1


def cmd_local_check(args, cfg: ScenarioConfig) -> int:
    report = run_local_checks(cfg)
    _emit(render_json(report) if args.format == "json" else render_text(report), args.out)
    for failure in report["failures"]:
        logger.error("Check failed: %s", failure)
    return 0 if report["status"] == PASS else 1


def cmd_torus_scan(args, cfg: ScenarioConfig) -> int:
    df = torus_scan(cfg, pl_bound=args.pl_bound)
    summary = summarize_scan(df)
    _emit(render_scan(df, summary, args.format), args.out)
    bad = scan_failures(summary)
    if bad:
        logger.error("%d triple(s) break the exact sequence or the PL decomposition", bad)
    return 0 if bad == 0 else 1


def cmd_report_render(args, cfg: ScenarioConfig) -> int:
    try:
        with open(args.report, "r", encoding="utf-8") as f:
            report = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read report {args.report!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"report {args.report!r} is not valid JSON: {exc}") from exc
    if not isinstance(report, dict) or report.get("schema") != 1:
        raise ConfigError(f"report {args.report!r} has no supported schema")
    if args.svg:
        curves = report.get("curves")
        if not curves:
            raise ConfigError("only verify-les reports carry curves to draw")
        conv = int(report.get("twist", {}).get("convention", 1))
        render_configuration(parse_curve(curves["L"], "L"), parse_curve(curves["L0"], "L0"),
                             parse_curve(curves["L1"], "L1"), args.svg, conv=conv)
    try:
        _emit(render_json(report) if args.format == "json" else render_text(report), args.out)
    except KeyError as exc:
        raise ConfigError(f"report lacks field {exc}") from exc
    if is_scan_doc(report):
        return 0 if scan_failures(report["summary"]) == 0 else 1
    if "triple" in report:
        failed = recheck_triple(report["triple"])
        for name in failed:
            logger.error("Saved triple fails %s", name)
        if failed:
            return 1
    return 0 if report.get("status", PASS) == PASS else 1


COMMANDS = {
    "verify-les": cmd_verify_les,
    "local-check": cmd_local_check,
    "torus-scan": cmd_torus_scan,
    "report-render": cmd_report_render,
}


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose)

    try:
        cfg = _scenario_config(args)
        return COMMANDS[args.command](args, cfg)
    except InputError as exc:
        logger.error("%s", exc)
        ap.print_usage(sys.stderr)
        return 2
    except CheckFailed as exc:
        logger.error("Check failed: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
