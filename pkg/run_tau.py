#!/usr/bin/env python3
"""
TauCheck CLI - oracle vs grid detector for first hitting times of F_sigma sets

Usage:
    python run_tau.py verify                                  # tau_config.json or defaults
    python run_tau.py verify --scenario oracle-equivalence --jobs 8 --csv out.csv
    python run_tau.py verify --scenario mis-scheduled         # exits 1 (vacuous levels)
    python run_tau.py detect --replicate 3                    # full per-level trace
    python run_tau.py detect --fixture path.json
    python run_tau.py simulate --replicate 3 --out path.json  # write a path fixture
    python run_tau.py sweep --axis N --values 1,2,4,8
    python run_tau.py --scenarios
    python run_tau.py --scenario-help planted-jump

Exit codes: 0 agreement/success, 1 disagreement (or sweep law violated), 2 config error,
130 interrupted.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from scenario_library import (
    build_config_from_scenario,
    get_scenario_help,
    get_scenario_info,
    list_scenarios,
)
from tau_config import (
    DEFAULT_CONFIG_FILE,
    ConfigError,
    ScenarioConfig,
    apply_overrides,
    load_config,
    parse_config,
)
from tau_harness import (
    MonotonicityViolation,
    build_path,
    detect_trace,
    emit_csv,
    emit_sweep_csv,
    format_report,
    format_sweep,
    sweep,
    verify_identity,
)
from tau_paths import path_to_fixture

EXIT_OK = 0
EXIT_DISAGREEMENT = 1
EXIT_CONFIG = 2
EXIT_INTERRUPTED = 130


def _parse_param(text: str) -> tuple:
    """k=v with v read as JSON when it parses ("12", "true"), else kept as text ("3/2")"""
    if "=" not in text:
        raise ConfigError("--param", f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    try:
        return key.strip(), json.loads(value)
    except json.JSONDecodeError:
        return key.strip(), value


def _load_json(file_name: str, field_name: str) -> Dict[str, Any]:
    try:
        with open(file_name, "r") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(field_name, f"cannot read {file_name}: {e}")


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    """Defaults < config file < preset < --param < flags"""
    config_path: Optional[str] = args.config
    if config_path is None and Path(DEFAULT_CONFIG_FILE).exists():
        config_path = DEFAULT_CONFIG_FILE
    raw = load_config(config_path)

    params = dict(_parse_param(p) for p in args.param or [])
    if args.scenario:
        raw = build_config_from_scenario(args.scenario, base=raw, **params)
    else:
        raw = apply_overrides(raw, params)

    overrides = {
        "seed": args.seed,
        "mode": args.mode,
        "replicates": args.replicates,
        "jobs": args.jobs,
        "event.levels": args.levels,
        "event.schedule": args.schedule,
    }
    if getattr(args, "full", False):
        overrides["event.full_levels"] = True
    if getattr(args, "fixture", None):
        overrides["path.fixture"] = _load_json(args.fixture, "--fixture")
    return parse_config(apply_overrides(raw, overrides))


# =============================================================================
# Subcommands
# =============================================================================


def cmd_simulate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    sub, path = build_path(config, args.replicate)
    fixture = path_to_fixture(path)
    text = json.dumps(fixture, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"[OK] Replicate {args.replicate} (subseed {sub}) written to {args.out}")
    else:
        print(text)
    return EXIT_OK


def cmd_detect(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    print(detect_trace(config, args.replicate))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    result = verify_identity(config)
    print(format_report(result.report))
    if args.csv:
        emit_csv(result.report, args.csv)
    return EXIT_OK if result.exit_code == 0 else EXIT_DISAGREEMENT


def cmd_sweep(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    try:
        values = [int(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("--values", f"expected comma-separated integers, got {args.values!r}")
    try:
        table = sweep(config, args.axis, values)
    except MonotonicityViolation as e:
        print(f"\n[FAIL] {e}")
        return EXIT_DISAGREEMENT
    print(format_sweep(table))
    if args.csv:
        emit_sweep_csv(table, args.csv)
    return EXIT_OK


# =============================================================================
# Argument parsing
# =============================================================================


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help=f"JSON config file (default: {DEFAULT_CONFIG_FILE} if present)")
    parser.add_argument("--scenario", help="named preset (see --scenarios)")
    parser.add_argument(
        "--param", action="append", metavar="KEY=VALUE",
        help="preset parameter or dotted config key, repeatable",
    )
    parser.add_argument("--seed", type=int, help="master seed (u64)")
    parser.add_argument("--mode", choices=["exact", "float"])
    parser.add_argument("--levels", type=int, help="max level N")
    parser.add_argument("--schedule", help="guaranteed | coverage | base=<b> | custom=<m1>,<m2>,...")
    parser.add_argument("--jobs", type=int, help="parallel replicate workers")
    parser.add_argument("--replicates", type=int)
    parser.add_argument("--verbose", "-v", action="store_true", help="DEBUG logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_tau.py",
        allow_abbrev=False,
        description="Exact first hitting times vs the rational-grid detector",
    )
    parser.add_argument("--scenarios", action="store_true", help="list preset scenarios")
    parser.add_argument("--scenario-help", metavar="NAME", help="describe one preset")
    sub = parser.add_subparsers(dest="command")

    simulate = sub.add_parser("simulate", help="emit a path fixture")
    _add_common(simulate)
    simulate.add_argument("--replicate", type=int, default=0)
    simulate.add_argument("--out", help="fixture file (default: stdout)")
    simulate.set_defaults(handler=cmd_simulate)

    detect = sub.add_parser("detect", help="one path, one U, full per-level trace")
    _add_common(detect)
    detect.add_argument("--replicate", type=int, default=0)
    detect.add_argument("--fixture", help="path fixture JSON to use instead of generating")
    detect.set_defaults(handler=cmd_detect)

    verify = sub.add_parser("verify", help="detector = oracle on every replicate?")
    _add_common(verify)
    verify.add_argument("--fixture", help="path fixture JSON to use instead of generating")
    verify.add_argument("--csv", help="write the replicate rows as CSV")
    verify.add_argument("--full", action="store_true", help="run all levels past the first rejection")
    verify.set_defaults(handler=cmd_verify)

    sweep_cmd = sub.add_parser("sweep", help="convergence table along N, base or K")
    _add_common(sweep_cmd)
    sweep_cmd.add_argument("--axis", choices=["N", "base", "K"], required=True)
    sweep_cmd.add_argument("--values", required=True, help="strictly increasing, comma-separated")
    sweep_cmd.add_argument("--csv", help="write the sweep table as CSV")
    sweep_cmd.set_defaults(handler=cmd_sweep)

    return parser


def print_scenarios():
    print("\nAvailable scenarios:")
    for name in list_scenarios():
        print(f"  - {name:<24} {get_scenario_info(name)['description']}")
    print("\nUse 'python run_tau.py --scenario-help <name>' for details\n")


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(asctime)s - [TauCheck] - %(levelname)s - %(message)s",
    )

    try:
        if args.scenarios:
            print_scenarios()
            return EXIT_OK
        if args.scenario_help:
            print()
            print(get_scenario_help(args.scenario_help))
            print()
            return EXIT_OK
        if not args.command:
            parser.print_help()
            return EXIT_CONFIG
        return args.handler(args)
    except (ValueError, OSError) as e:
        # ConfigError, ScenarioError and the set/path/oracle/detector input errors
        print(f"\nError: {e}\n", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print("\n\nRun cancelled by user.")
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
