#!/usr/bin/env python3
"""
Scenario Library - Named Preset Scenarios
=========================================
Maps short scenario names to config fragments layered over DEFAULT_CONFIG.

Usage:
    from scenario_library import build_config_from_scenario, list_scenarios

    raw = build_config_from_scenario("oracle-equivalence", replicates=200)
    config = parse_config(raw)
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from tau_config import DEFAULT_CONFIG, apply_overrides, merge_config


# Named parameters accepted by every preset, mapped to config keys
COMMON_PARAMS = {
    "replicates": "replicates",
    "seed": "seed",
    "jobs": "jobs",
    "levels": "event.levels",
    "t": "event.t",
    "rate": "path.rate",
    "schedule": "event.schedule",
    "mode": "mode",
}

SCENARIOS = {
    "no-jump-fixture": {
        "description": "Fixed linear path without jumps; detector must reject (oracle: never)",
        "required": [],
        "optional": {"replicates": 1},
        "params": {},
        "config": {
            "scenario_id": "no-jump-fixture",
            "path": {
                "fixture": {
                    "horizon": "1",
                    "exact": True,
                    "breakpoints": [["0", "0"], ["1", "1/2"]],
                    "jumps": [],
                }
            },
            "target": {"kind": "literal", "components": [[["1/2", "1"]]]},
        },
    },
    "planted-jump": {
        "description": "Compound Poisson paths with a planted jump inside U (completeness)",
        "required": [],
        "optional": {"replicates": 500, "time": "1/2", "size": "7/4"},
        "params": {},
        "config": {
            "scenario_id": "planted-jump",
            "target": {"kind": "literal", "components": [[["3/2", "2"]]]},
        },
    },
    "oracle-equivalence": {
        "description": "Rate-3 compound Poisson, lattice sizes, U far from off-target sizes",
        "required": [],
        "optional": {"replicates": 1000, "jobs": 4},
        "params": {},
        "config": {
            "scenario_id": "oracle-equivalence",
            "path": {
                "rate": "3",
                "horizon": "1",
                "sizes": {"kind": "lattice", "support": ["-1", "-1/2", "1/2", "1", "7/4"]},
            },
            "target": {"kind": "literal", "components": [[["3/2", "2"]]]},
            "event": {"t": "1", "schedule": "guaranteed", "auto_levels": True},
        },
    },
    "open-interval": {
        "description": "Truncated open interval U = (1/2, 3/2) as K closed components",
        "required": [],
        "optional": {"replicates": 200, "K": 4},
        "params": {"K": "target.K"},
        "config": {
            "scenario_id": "open-interval",
            "target": {"kind": "open_interval", "a": "1/2", "b": "3/2", "K": 4},
        },
    },
    "zero-in-target": {
        "description": "0 in U: every replicate hits at T = 0, detector not consulted",
        "required": [],
        "optional": {"replicates": 100},
        "params": {},
        "config": {
            "scenario_id": "zero-in-target",
            "target": {"kind": "literal", "components": [[["-1/4", "1/4"]]]},
        },
    },
    "mis-scheduled": {
        "description": "Constant resolution m(n) = 2: empty pair sets, vacuous rejections",
        "required": [],
        "optional": {"replicates": 100},
        "params": {},
        "config": {
            "scenario_id": "mis-scheduled",
            "event": {"schedule": "base=2", "auto_levels": False, "levels": 8},
        },
    },
    "rejection-certificate": {
        "description": "Negative jumps only, U = [1, 2], rough exact continuous part",
        "required": [],
        "optional": {"replicates": 500},
        "params": {},
        "config": {
            "scenario_id": "rejection-certificate",
            "path": {
                "sizes": {"kind": "lattice", "support": ["-1", "-1/2", "-1/4"]},
                "continuous": {
                    "kind": "random_walk",
                    "initial": "0",
                    "steps": 16,
                    "max_slope": "1",
                    "slope_denominator": 4,
                },
            },
            "target": {"kind": "literal", "components": [[["1", "2"]]]},
        },
    },
    "float-stress": {
        "description": "Brownian continuous part in float mode (no guarantee)",
        "required": [],
        "optional": {"replicates": 100},
        "params": {"sigma": "path.continuous.sigma"},
        "config": {
            "scenario_id": "float-stress",
            "mode": "float",
            "path": {"continuous": {"kind": "brownian", "initial": "0", "steps": 64, "sigma": 0.25}},
            "event": {"schedule": "coverage", "auto_levels": False},
        },
    },
    "replay-fixture": {
        "description": "Replay a path fixture written by `run_tau.py simulate`",
        "required": ["file"],
        "optional": {"replicates": 1},
        "params": {"file": "path.fixture"},
        "config": {"scenario_id": "replay-fixture"},
    },
}


class ScenarioError(ValueError):
    """Raised when scenario validation fails"""

    pass


def list_scenarios() -> List[str]:
    """List all available scenario names"""
    return list(SCENARIOS.keys())


def get_scenario_info(scenario_name: str) -> Dict[str, Any]:
    """Get scenario definition

    Raises:
        ScenarioError: If scenario not found
    """
    if scenario_name not in SCENARIOS:
        available = ", ".join(list_scenarios())
        raise ScenarioError(f"Unknown scenario: {scenario_name}. Available: {available}")
    return SCENARIOS[scenario_name]


def _param_keys(scenario: Dict[str, Any]) -> Dict[str, str]:
    return {**COMMON_PARAMS, **scenario["params"]}


def validate_scenario_params(scenario_name: str, params: Dict[str, Any]) -> None:
    """Check required parameters are present and every parameter is known

    Dotted config keys ("event.full_levels") are always accepted.

    Raises:
        ScenarioError: If required parameters are missing or a name is unknown
    """
    scenario = get_scenario_info(scenario_name)

    missing = [param for param in scenario["required"] if param not in params]
    if missing:
        raise ScenarioError(
            f"Missing required parameters for {scenario_name}: {', '.join(missing)}"
        )

    known = set(_param_keys(scenario)) | set(scenario["optional"])
    unknown = [p for p in params if p not in known and "." not in p]
    if unknown:
        raise ScenarioError(f"Unknown parameters for {scenario_name}: {', '.join(sorted(unknown))}")


def _load_fixture(file_name: str) -> Dict[str, Any]:
    try:
        with open(Path(file_name), "r") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ScenarioError(f"Cannot read fixture {file_name}: {e}")


def build_config_from_scenario(
    scenario_name: str, base: Optional[Dict[str, Any]] = None, **params
) -> Dict[str, Any]:
    """Raw config dict for a preset: base, then the preset fragment, then params

    Examples:
        >>> raw = build_config_from_scenario("mis-scheduled", replicates=10)
        >>> raw["event"]["schedule"], raw["replicates"]
        ('base=2', 10)
    """
    scenario = get_scenario_info(scenario_name)
    validate_scenario_params(scenario_name, params)

    merged_params = {}
    merged_params.update(scenario["optional"])
    merged_params.update(params)

    raw = merge_config(base if base is not None else DEFAULT_CONFIG, scenario["config"])

    # planted-jump takes its jump from two scalar params
    if scenario_name == "planted-jump":
        time = merged_params.pop("time")
        size = merged_params.pop("size")
        raw["path"]["planted_jumps"] = [[str(time), str(size)]]

    keys = _param_keys(scenario)
    overrides = {}
    for name, value in merged_params.items():
        key = keys.get(name, name)
        if key == "path.fixture" and isinstance(value, str):
            value = _load_fixture(value)
        overrides[key] = value
    return apply_overrides(raw, overrides)


def get_scenario_help(scenario_name: str) -> str:
    """Get help text for a scenario"""
    scenario = get_scenario_info(scenario_name)

    help_text = [
        f"Scenario: {scenario_name}",
        f"Description: {scenario['description']}",
        "",
    ]

    if scenario["required"]:
        help_text.append("Required parameters:")
        for param in scenario["required"]:
            help_text.append(f"  --param {param}=<value>")
        help_text.append("")

    if scenario["optional"]:
        help_text.append("Optional parameters:")
        for param, default in scenario["optional"].items():
            help_text.append(f"  --param {param}=<value> (default: {default})")
        help_text.append("")

    help_text.append("Example:")
    if scenario["required"]:
        example = " ".join(f"--param {p}=..." for p in scenario["required"])
        help_text.append(f"  python run_tau.py verify --scenario {scenario_name} {example}")
    else:
        help_text.append(f"  python run_tau.py verify --scenario {scenario_name}")

    return "\n".join(help_text)
