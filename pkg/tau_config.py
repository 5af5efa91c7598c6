#!/usr/bin/env python3
"""
TauCheck Configuration
======================
Scenario configuration: JSON document with rationals written as "p/q"
strings, merged section by section over DEFAULT_CONFIG, then validated into
a frozen ScenarioConfig.

Usage:
    from tau_config import load_config, parse_config

    raw = load_config("tau_config.json", {"event.levels": 12, "seed": 7})
    config = parse_config(raw)

Document layout:
    {
      "scenario_id": "default", "seed": 20240601, "replicates": 100,
      "mode": "exact", "jobs": 1, "record_timings": false, "event_log_dir": null,
      "path":   {"rate": "3", "horizon": "1", "time_denominator": 32,
                 "sizes": {...}, "continuous": {...}, "planted_jumps": [], "fixture": null},
      "target": {"kind": "literal" | "open_interval" | "open_ray", ...},
      "event":  {"t": "1", "levels": 8, "auto_levels": true,
                 "schedule": "guaranteed" | "coverage" | "base=<b>" | "custom=<m1>,<m2>,...",
                 "full_levels": false}
    }
"""

import copy
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

from tau_detector import (
    ScheduleFn,
    coverage_schedule,
    custom_schedule,
    default_schedule,
    fixed_schedule,
)
from tau_paths import (
    CadlagPath,
    ContinuousSpec,
    JumpSpec,
    SizeDistribution,
    jump_list,
    path_from_fixture,
)
from tau_sets import (
    FSigmaSet,
    SetError,
    format_rational,
    open_interval_fsigma,
    open_ray_fsigma,
    parse_rational,
    prefix,
)

logger = logging.getLogger("TauCheck_Config")

DEFAULT_CONFIG_FILE = "tau_config.json"
MODES = ("exact", "float")

DEFAULT_CONFIG: Dict[str, Any] = {
    "scenario_id": "default",
    "seed": 20240601,
    "replicates": 100,
    "mode": "exact",
    "jobs": 1,
    "record_timings": False,
    "event_log_dir": None,
    "path": {
        "rate": "3",
        "horizon": "1",
        "time_denominator": 32,
        "sizes": {"kind": "lattice", "support": ["-1", "-1/2", "1/2", "1", "7/4"]},
        "continuous": {"kind": "constant", "initial": "0"},
        "planted_jumps": [],
        "fixture": None,
    },
    "target": {"kind": "literal", "components": [[["3/2", "2"]]]},
    "event": {
        "t": "1",
        "levels": 8,
        "auto_levels": True,
        "schedule": "guaranteed",
        "full_levels": False,
    },
}

SECTIONS = ("path", "target", "event")


class ConfigError(ValueError):
    """Raised when a configuration field is invalid"""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        self.message = message
        super().__init__(f"{field_name}: {message}")


def _parse(field_name: str, fn: Callable, *args, **kwargs):
    """Run a parser and re-raise its failure as a field-level ConfigError"""
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as e:
        raise ConfigError(field_name, str(e))


def _as_int(field_name: str, value: Any, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field_name, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(field_name, f"must be >= {minimum}, got {value}")
    return value


def _as_bool(field_name: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(field_name, f"expected true/false, got {value!r}")
    return value


# =============================================================================
# Schedule and target specs
# =============================================================================


@dataclass(frozen=True)
class ScheduleSpec:
    """Per-level resolution rule

    guaranteed - max(required_resolution(n), 2*ceil(t*n)+2); exact mode only
    coverage   - 2*ceil(t*n)+2 (nonvacuous, no guarantee)
    base       - m(n) = base for every level
    custom     - m(n) from an explicit list
    """

    kind: str = "guaranteed"
    base: int = 0
    resolutions: Tuple[int, ...] = ()

    KINDS = ("guaranteed", "coverage", "base", "custom")

    @classmethod
    def parse(cls, text: str) -> "ScheduleSpec":
        text = str(text).strip()
        if text in ("guaranteed", "coverage"):
            return cls(text)
        if text.startswith("base="):
            return cls("base", base=int(text[len("base="):]))
        if text.startswith("custom="):
            values = tuple(int(v) for v in text[len("custom="):].split(",") if v.strip())
            return cls("custom", resolutions=values)
        raise ValueError(
            f"Unknown schedule {text!r}; use guaranteed, coverage, base=<b> or custom=<m1>,<m2>,..."
        )

    def bind(self, path: CadlagPath, t: Fraction) -> ScheduleFn:
        if self.kind == "guaranteed":
            return default_schedule(path, t)
        if self.kind == "coverage":
            return coverage_schedule(t)
        if self.kind == "base":
            return fixed_schedule(self.base)
        return custom_schedule(self.resolutions)

    def __str__(self) -> str:
        if self.kind == "base":
            return f"base={self.base}"
        if self.kind == "custom":
            return "custom=" + ",".join(str(m) for m in self.resolutions)
        return self.kind


@dataclass(frozen=True)
class TargetSpec:
    """How to build U; K is the component count for truncated constructors"""

    kind: str
    components: Tuple[Tuple[Tuple[Any, Any], ...], ...] = ()
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(1)
    c: Fraction = Fraction(0)
    K: int = 1
    upward: bool = True

    KINDS = ("literal", "open_interval", "open_ray")

    def build(self, K: Optional[int] = None) -> FSigmaSet:
        count = self.K if K is None else K
        if self.kind == "open_interval":
            return open_interval_fsigma(self.a, self.b, count)
        if self.kind == "open_ray":
            return open_ray_fsigma(self.c, count, self.upward)
        U = FSigmaSet.from_literal(self.components)
        if K is None or not U.components:
            return U
        return prefix(U, K)


# =============================================================================
# ScenarioConfig
# =============================================================================


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario; every field has been range-checked"""

    scenario_id: str
    seed: int
    replicates: int
    rate: Fraction
    horizon: Fraction
    sizes: SizeDistribution
    time_denominator: int
    continuous: ContinuousSpec
    target_spec: TargetSpec
    t: Fraction
    levels: int
    planted_jumps: Tuple[JumpSpec, ...] = ()
    fixture: Optional[CadlagPath] = None
    auto_levels: bool = True
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    full_levels: bool = False
    mode: str = "exact"
    jobs: int = 1
    record_timings: bool = False
    event_log_dir: Optional[str] = None

    @property
    def target(self) -> FSigmaSet:
        return self.target_spec.build()

    @property
    def guaranteed(self) -> bool:
        return self.schedule.kind == "guaranteed"


def _parse_sizes(raw: Dict[str, Any]) -> SizeDistribution:
    kind = raw.get("kind", "lattice")
    if kind == "lattice":
        support = tuple(parse_rational(v) for v in raw["support"])
        weights = raw.get("weights")
        return SizeDistribution(support, tuple(float(w) for w in weights) if weights else None)
    if kind == "lattice_range":
        return SizeDistribution.lattice_range(
            parse_rational(raw["low"]), parse_rational(raw["high"]), int(raw["denominator"])
        )
    raise ValueError(f"Unknown size distribution kind {kind!r}; use lattice or lattice_range")


def _parse_continuous(raw: Dict[str, Any], mode: str) -> ContinuousSpec:
    kind = raw.get("kind", "constant")
    if kind not in ContinuousSpec.KINDS:
        raise ValueError(f"Unknown continuous kind {kind!r}; use one of {', '.join(ContinuousSpec.KINDS)}")
    if kind == "brownian" and mode != "float":
        raise ValueError("Brownian continuous part is inexact and requires mode 'float'")
    sigma = raw.get("sigma", 0.25)
    if isinstance(sigma, str):
        sigma = float(sigma)
    return ContinuousSpec(
        kind=kind,
        initial=parse_rational(raw.get("initial", "0")),
        slope=parse_rational(raw.get("slope", "0")),
        breakpoints=tuple(
            (parse_rational(t), parse_rational(v)) for t, v in raw.get("breakpoints", [])
        ),
        steps=int(raw.get("steps", 16)),
        max_slope=parse_rational(raw.get("max_slope", "1")),
        slope_denominator=int(raw.get("slope_denominator", 4)),
        sigma=float(sigma),
    )


def _parse_target(raw: Dict[str, Any]) -> TargetSpec:
    kind = raw.get("kind", "literal")
    if kind == "literal":
        components = tuple(
            tuple((lo, hi) for lo, hi in component) for component in raw.get("components", [])
        )
        spec = TargetSpec("literal", components=components)
    elif kind == "open_interval":
        spec = TargetSpec(
            "open_interval",
            a=parse_rational(raw["a"]),
            b=parse_rational(raw["b"]),
            K=int(raw.get("K", 1)),
        )
    elif kind == "open_ray":
        spec = TargetSpec(
            "open_ray",
            c=parse_rational(raw["c"]),
            K=int(raw.get("K", 1)),
            upward=bool(raw.get("upward", True)),
        )
    else:
        raise ValueError(f"Unknown target kind {kind!r}; use one of {', '.join(TargetSpec.KINDS)}")
    spec.build()  # surfaces SetError for malformed literals now
    return spec


def parse_config(raw: Dict[str, Any]) -> ScenarioConfig:
    """Validate a merged config dict into a ScenarioConfig

    Raises:
        ConfigError: naming the offending field
    """
    path = raw.get("path", {})
    event = raw.get("event", {})

    mode = raw.get("mode", "exact")
    if mode not in MODES:
        raise ConfigError("mode", f"expected exact or float, got {mode!r}")

    seed = _as_int("seed", raw.get("seed", 0), 0)
    replicates = _as_int("replicates", raw.get("replicates", 1), 1)
    jobs = _as_int("jobs", raw.get("jobs", 1), 1)

    rate = _parse("path.rate", parse_rational, path.get("rate", "1"))
    if not rate > 0:
        raise ConfigError("path.rate", f"must be > 0, got {format_rational(rate)}")
    horizon = _parse("path.horizon", parse_rational, path.get("horizon", "1"))
    if not horizon > 0:
        raise ConfigError("path.horizon", f"must be > 0, got {format_rational(horizon)}")
    time_denominator = _as_int("path.time_denominator", path.get("time_denominator", 32), 1)
    sizes = _parse("path.sizes", _parse_sizes, path.get("sizes", {}))
    continuous = _parse("path.continuous", _parse_continuous, path.get("continuous", {}), mode)
    planted = _parse("path.planted_jumps", jump_list, path.get("planted_jumps") or [])
    if planted and planted[-1].time > horizon:
        raise ConfigError("path.planted_jumps", f"jump at {planted[-1].time} lies after the horizon")

    fixture = None
    if path.get("fixture"):
        fixture = _parse("path.fixture", path_from_fixture, path["fixture"])
        horizon = fixture.horizon
        if not fixture.exact and mode != "float":
            raise ConfigError("path.fixture", "inexact fixture requires mode 'float'")

    target_spec = _parse("target", _parse_target, raw.get("target", {}))

    t = _parse("event.t", parse_rational, event.get("t", "1"))
    if not 0 < t <= horizon:
        raise ConfigError("event.t", f"must lie in (0, horizon={format_rational(horizon)}], got {format_rational(t)}")
    levels = _as_int("event.levels", event.get("levels", 8), 1)
    auto_levels = _as_bool("event.auto_levels", event.get("auto_levels", True))
    full_levels = _as_bool("event.full_levels", event.get("full_levels", False))
    schedule = _parse("event.schedule", ScheduleSpec.parse, event.get("schedule", "guaranteed"))
    if schedule.kind == "base" and schedule.base < 2:
        raise ConfigError("event.schedule", f"base resolution must be >= 2, got {schedule.base}")
    if schedule.kind == "custom" and (not schedule.resolutions or min(schedule.resolutions) < 2):
        raise ConfigError("event.schedule", "custom resolutions must all be >= 2")
    if schedule.kind == "guaranteed" and mode != "exact":
        raise ConfigError("event.schedule", "guaranteed schedule requires exact arithmetic")

    return ScenarioConfig(
        scenario_id=str(raw.get("scenario_id", "scenario")),
        seed=seed,
        replicates=replicates,
        rate=rate,
        horizon=horizon,
        sizes=sizes,
        time_denominator=time_denominator,
        continuous=continuous,
        target_spec=target_spec,
        t=t,
        levels=levels,
        planted_jumps=planted,
        fixture=fixture,
        auto_levels=auto_levels,
        schedule=schedule,
        full_levels=full_levels,
        mode=mode,
        jobs=jobs,
        record_timings=_as_bool("record_timings", raw.get("record_timings", False)),
        event_log_dir=raw.get("event_log_dir"),
    )


# =============================================================================
# Loading and merging
# =============================================================================


def merge_config(base: Dict[str, Any], overlay: Dict[str, Any]) -> Dict[str, Any]:
    """Overlay top-level keys; the path/target/event sections merge one level deep"""
    merged = copy.deepcopy(base)
    for key, value in overlay.items():
        if key in SECTIONS and isinstance(value, dict):
            if key == "target" and "kind" in value:
                merged[key] = copy.deepcopy(value)
            else:
                merged.setdefault(key, {}).update(copy.deepcopy(value))
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def apply_overrides(raw: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Apply dotted-key overrides such as {"event.levels": 12}"""
    merged = copy.deepcopy(raw)
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = merged
        *parents, leaf = dotted.split(".")
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return merged


def load_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    base: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Defaults, then the JSON file (if any), then dotted overrides

    Raises:
        ConfigError: if the file exists but is not valid JSON
    """
    raw = copy.deepcopy(base if base is not None else DEFAULT_CONFIG)
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError("config", f"file not found: {path}")
        try:
            with open(path, "r") as f:
                raw = merge_config(raw, json.load(f))
            logger.info(f"[OK] Config loaded from {path}")
        except json.JSONDecodeError as e:
            raise ConfigError("config", f"invalid JSON in {path}: {e}")
    return apply_overrides(raw, overrides or {})
