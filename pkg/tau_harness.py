#!/usr/bin/env python3
"""
TauCheck Harness
================
Monte Carlo runner that compares the exact hitting oracle with the grid
detector on seeded replicates.

    run_scenario     - R replicates, oracle vs detector, one row each
    sweep            - convergence table along N, base resolution or K
    verify_identity  - exit status + classified disagreement listing
    emit_csv         - CSV contract (rationals as "p/q")

Replicate r uses subseed(seed, r), so rows do not depend on how replicates
are scheduled; with jobs > 1 they run in a process pool driven by asyncio
and are reassembled by replicate index.
"""

import asyncio
import csv
import json
import logging
import time
import uuid
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from tau_config import ScenarioConfig, ScheduleSpec
from tau_detector import (
    NoRejectionLevel,
    Witness,
    certified_levels,
    detect_fsigma,
    format_trace,
    format_witness,
)
from tau_oracle import HitBranch, HittingResult, first_hitting_time, jump_distances
from tau_paths import CadlagPath, gen_compound_poisson, subseed, with_planted_jumps
from tau_sets import format_rational

logger = logging.getLogger("TauCheck_Harness")

# auto_levels never raises N beyond this; larger certificates are reported instead
MAX_AUTO_LEVELS = 256

CSV_COLUMNS = [
    "scenario_id",
    "replicate",
    "subseed",
    "oracle_event",
    "oracle_branch",
    "oracle_time",
    "detector_overall",
    "first_reject_level",
    "witness_p",
    "witness_q",
    "witness_increment",
    "levels_run",
    "total_pairs",
    "arithmetic_mode",
    "runtime_ms",
]

SWEEP_AXES = ("N", "base", "K")


class MonotonicityViolation(AssertionError):
    """A sweep broke a monotonicity law that holds in exact mode"""

    pass


# =============================================================================
# Report types
# =============================================================================


@dataclass(frozen=True)
class ReplicateRow:
    """Oracle vs detector for one replicate"""

    scenario_id: str
    replicate: int
    subseed: int
    oracle_event: bool
    oracle_branch: HitBranch
    oracle_time: Union[Fraction, float]
    detector_overall: bool
    first_reject_level: Optional[int]
    witness: Optional[Witness]
    levels_run: int
    total_pairs: int
    pair_counts: Tuple[int, ...]
    arithmetic_mode: str
    runtime_ms: float = field(compare=False)
    diagnostics: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def agrees(self) -> bool:
        return self.oracle_event == self.detector_overall


@dataclass(frozen=True)
class ScenarioReport:
    """All replicate rows of one scenario, ordered by replicate index"""

    scenario_id: str
    rows: Tuple[ReplicateRow, ...]
    record_timings: bool = False

    @property
    def agreement_rate(self) -> Fraction:
        if not self.rows:
            return Fraction(1)
        return Fraction(sum(1 for r in self.rows if r.agrees), len(self.rows))

    @property
    def oracle_event_rate(self) -> Fraction:
        if not self.rows:
            return Fraction(0)
        return Fraction(sum(1 for r in self.rows if r.oracle_event), len(self.rows))

    @property
    def detector_event_rate(self) -> Fraction:
        if not self.rows:
            return Fraction(0)
        return Fraction(sum(1 for r in self.rows if r.detector_overall), len(self.rows))

    @property
    def disagreements(self) -> List[ReplicateRow]:
        return [r for r in self.rows if not r.agrees]

    @property
    def vacuous_count(self) -> int:
        return sum(1 for r in self.rows if r.diagnostics.get("vacuous_levels"))


# =============================================================================
# Structured run log (JSONL)
# =============================================================================


class RunLogger:
    """
    Structured JSONL log of harness runs.

    One event per line with timestamp, session id and event type. Disabled
    when log_dir is None; write failures are logged and swallowed.
    """

    def __init__(self, log_dir: Optional[Union[str, Path]] = None):
        self.session_id = str(uuid.uuid4())[:8]
        self.log_file: Optional[Path] = None
        if log_dir is not None:
            directory = Path(log_dir)
            directory.mkdir(parents=True, exist_ok=True)
            self.log_file = (
                directory / f"tau_{datetime.now().strftime('%Y%m%d')}_{self.session_id}.jsonl"
            )
            logger.info(f"RunLogger writing to {self.log_file}")

    @property
    def enabled(self) -> bool:
        return self.log_file is not None

    def _write(self, event_type: str, data: Dict[str, Any]):
        if self.log_file is None:
            return
        entry = {
            "timestamp": datetime.now().isoformat(),
            "session_id": self.session_id,
            "event_type": event_type,
            **data,
        }
        try:
            with open(self.log_file, "a") as f:
                f.write(json.dumps(entry, default=str) + "\n")
        except Exception as e:
            logger.error(f"Log write failed: {e}")

    def scenario_started(self, config: ScenarioConfig):
        self._write(
            "scenario_started",
            {
                "scenario_id": config.scenario_id,
                "seed": config.seed,
                "replicates": config.replicates,
                "mode": config.mode,
                "schedule": str(config.schedule),
                "levels": config.levels,
                "jobs": config.jobs,
            },
        )

    def replicate_evaluated(self, row: ReplicateRow):
        self._write(
            "replicate_evaluated",
            {
                "scenario_id": row.scenario_id,
                "replicate": row.replicate,
                "oracle_event": row.oracle_event,
                "detector_overall": row.detector_overall,
                "levels_run": row.levels_run,
                "total_pairs": row.total_pairs,
                "runtime_ms": round(row.runtime_ms, 3),
            },
        )

    def disagreement(self, row: ReplicateRow):
        self._write(
            "disagreement",
            {"scenario_id": row.scenario_id, "replicate": row.replicate, **row.diagnostics},
        )

    def scenario_completed(self, report: ScenarioReport, total_time_ms: float):
        self._write(
            "scenario_completed",
            {
                "scenario_id": report.scenario_id,
                "replicates": len(report.rows),
                "agreement_rate": float(report.agreement_rate),
                "disagreements": len(report.disagreements),
                "total_time_ms": round(total_time_ms, 3),
            },
        )

    def sweep_point(self, axis: str, value: int, report: ScenarioReport):
        self._write(
            "sweep_point",
            {
                "scenario_id": report.scenario_id,
                "axis": axis,
                "value": value,
                "agreement_rate": float(report.agreement_rate),
                "oracle_event_rate": float(report.oracle_event_rate),
            },
        )


# =============================================================================
# Replicate evaluation
# =============================================================================


def build_path(config: ScenarioConfig, replicate: int) -> Tuple[int, CadlagPath]:
    """(subseed, path) for a replicate: the fixture, or a generated path"""
    sub = subseed(config.seed, replicate)
    if config.fixture is not None:
        path = config.fixture
    else:
        path = gen_compound_poisson(
            sub,
            config.rate,
            config.horizon,
            config.sizes,
            config.time_denominator,
            config.continuous,
        )
    if config.planted_jumps:
        path = with_planted_jumps(path, config.planted_jumps)
    return sub, path


def _level_plan(config: ScenarioConfig, path: CadlagPath) -> Tuple[int, Dict[str, Any]]:
    """Levels to run and the certificate diagnostics behind that choice"""
    diagnostics: Dict[str, Any] = {"levels_requested": config.levels}
    if config.mode != "exact" or not path.exact:
        diagnostics["guarantee"] = "none (float mode)"
        return config.levels, diagnostics

    U = config.target
    per_jump, d0 = jump_distances(path, U, config.t)
    d = min(per_jump + [d0])
    diagnostics["min_distance_to_U"] = format_rational(d)
    try:
        certified = certified_levels(path, U, config.t)
    except NoRejectionLevel:
        diagnostics["certified_levels"] = None
        return config.levels, diagnostics

    diagnostics["certified_levels"] = certified
    levels = config.levels
    if config.auto_levels:
        levels = max(levels, min(certified, MAX_AUTO_LEVELS))
    return levels, diagnostics


def _classify(
    config: ScenarioConfig, oracle_event: bool, levels: int, diagnostics: Dict[str, Any]
) -> str:
    """Name the broken guarantee precondition behind a disagreement"""
    if diagnostics.get("vacuous_levels"):
        return "vacuous_schedule"
    if config.mode != "exact":
        return "float_mode"
    if not config.guaranteed:
        return "schedule_below_guarantee"
    certified = diagnostics.get("certified_levels")
    if not oracle_event and certified is not None and levels < certified:
        return "levels_below_certificate"
    return "unresolved"


def evaluate_replicate(config: ScenarioConfig, replicate: int) -> ReplicateRow:
    """Generate one path and compare the oracle with the detector

    When 0 is in U the oracle's zero branch decides (T = 0) and the detector
    is not consulted.
    """
    start = time.perf_counter()
    sub, path = build_path(config, replicate)
    U = config.target
    oracle: HittingResult = first_hitting_time(path, U)
    oracle_event = oracle.time < config.t

    if oracle.branch is HitBranch.ZERO_IN_U:
        return ReplicateRow(
            scenario_id=config.scenario_id,
            replicate=replicate,
            subseed=sub,
            oracle_event=True,
            oracle_branch=oracle.branch,
            oracle_time=oracle.time,
            detector_overall=True,
            first_reject_level=None,
            witness=None,
            levels_run=0,
            total_pairs=0,
            pair_counts=(),
            arithmetic_mode=config.mode,
            runtime_ms=(time.perf_counter() - start) * 1000,
            diagnostics={"detector": "not consulted (0 in U)"},
        )

    levels, diagnostics = _level_plan(config, path)
    schedule = config.schedule.bind(path, config.t)
    verdict = detect_fsigma(
        path, U, config.t, levels, schedule, full=config.full_levels, float_mode=config.mode == "float"
    )

    vacuous = sorted({n for v in verdict.components for n in v.vacuous_levels})
    diagnostics["levels_run"] = levels
    diagnostics["vacuous_levels"] = vacuous
    diagnostics["resolution_level_1"] = schedule(1)
    if verdict.overall != oracle_event:
        diagnostics["classification"] = _classify(config, oracle_event, levels, diagnostics)

    return ReplicateRow(
        scenario_id=config.scenario_id,
        replicate=replicate,
        subseed=sub,
        oracle_event=oracle_event,
        oracle_branch=oracle.branch,
        oracle_time=oracle.time,
        detector_overall=verdict.overall,
        first_reject_level=verdict.first_reject_level,
        witness=verdict.witness,
        levels_run=verdict.levels_run,
        total_pairs=verdict.total_pairs,
        pair_counts=tuple(verdict.pair_counts),
        arithmetic_mode=config.mode,
        runtime_ms=(time.perf_counter() - start) * 1000,
        diagnostics=diagnostics,
    )


async def _run_parallel(config: ScenarioConfig) -> List[ReplicateRow]:
    """Fan replicates out to a process pool; gather keeps replicate order"""
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        tasks = [
            loop.run_in_executor(pool, evaluate_replicate, config, r)
            for r in range(config.replicates)
        ]
        return list(await asyncio.gather(*tasks))


def run_scenario(config: ScenarioConfig, run_logger: Optional[RunLogger] = None) -> ScenarioReport:
    """Evaluate all replicates of a scenario; deterministic given the config"""
    run_logger = run_logger or RunLogger(config.event_log_dir)
    run_logger.scenario_started(config)
    logger.info(
        f"[START] Scenario {config.scenario_id}: {config.replicates} replicates, "
        f"mode={config.mode}, schedule={config.schedule}, jobs={config.jobs}"
    )
    start = time.perf_counter()

    if config.jobs > 1 and config.replicates > 1:
        rows = asyncio.run(_run_parallel(config))
    else:
        rows = [evaluate_replicate(config, r) for r in range(config.replicates)]

    for row in rows:
        run_logger.replicate_evaluated(row)
        if not row.agrees:
            run_logger.disagreement(row)
            logger.warning(
                f"[WARN] Replicate {row.replicate} disagrees: oracle={row.oracle_event} "
                f"detector={row.detector_overall} ({row.diagnostics.get('classification')})"
            )

    report = ScenarioReport(config.scenario_id, tuple(rows), config.record_timings)
    total_ms = (time.perf_counter() - start) * 1000
    run_logger.scenario_completed(report, total_ms)
    logger.info(
        f"[OK] Scenario {config.scenario_id} done in {total_ms:.0f}ms: "
        f"agreement {float(report.agreement_rate):.3f}"
    )
    return report


# =============================================================================
# Sweeps
# =============================================================================


@dataclass(frozen=True)
class SweepRow:
    """Aggregate of one sweep point"""

    value: int
    replicates: int
    oracle_event_rate: Fraction
    detector_event_rate: Fraction
    agreement_rate: Fraction
    mean_levels: Fraction
    total_pairs: int


@dataclass(frozen=True)
class SweepTable:
    axis: str
    rows: Tuple[SweepRow, ...]
    asserted: Tuple[str, ...] = ()


def _config_for(config: ScenarioConfig, axis: str, value: int) -> ScenarioConfig:
    if axis == "N":
        return replace(config, levels=value, auto_levels=False)
    if axis == "base":
        return replace(config, schedule=ScheduleSpec("base", base=value))
    spec = config.target_spec
    if spec.kind == "literal":
        return replace(config, target_spec=replace(spec, components=spec.components[:value]))
    return replace(config, target_spec=replace(spec, K=value))


def _check_monotone(rows: Sequence[SweepRow], attr: str, axis: str):
    for prev, cur in zip(rows, rows[1:]):
        if getattr(cur, attr) < getattr(prev, attr):
            raise MonotonicityViolation(
                f"{attr} decreased along {axis}: {prev.value} -> {cur.value} "
                f"({float(getattr(prev, attr)):.4f} -> {float(getattr(cur, attr)):.4f})"
            )


def sweep(
    config: ScenarioConfig,
    axis: str,
    values: Sequence[int],
    run_logger: Optional[RunLogger] = None,
) -> SweepTable:
    """One aggregate row per axis value

    Asserted (exact mode): agreement nondecreasing along N under the
    guaranteed schedule; oracle event rate nondecreasing along K.

    Raises:
        ValueError: unknown axis or values not strictly increasing
        MonotonicityViolation: an asserted law failed
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"Unknown sweep axis {axis!r}; use one of {', '.join(SWEEP_AXES)}")
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"Sweep values must be strictly increasing, got {list(values)}")

    run_logger = run_logger or RunLogger(config.event_log_dir)
    rows = []
    for value in values:
        point = _config_for(config, axis, value)
        report = run_scenario(point, run_logger)
        run_logger.sweep_point(axis, value, report)
        n = len(report.rows)
        rows.append(
            SweepRow(
                value=value,
                replicates=n,
                oracle_event_rate=report.oracle_event_rate,
                detector_event_rate=report.detector_event_rate,
                agreement_rate=report.agreement_rate,
                mean_levels=Fraction(sum(r.levels_run for r in report.rows), max(n, 1)),
                total_pairs=sum(r.total_pairs for r in report.rows),
            )
        )

    asserted = []
    if config.mode == "exact":
        if axis == "N" and config.guaranteed:
            _check_monotone(rows, "agreement_rate", axis)
            asserted.append("agreement_rate nondecreasing")
        if axis == "K":
            _check_monotone(rows, "oracle_event_rate", axis)
            asserted.append("oracle_event_rate nondecreasing")
    return SweepTable(axis, tuple(rows), tuple(asserted))


# =============================================================================
# Identity verification
# =============================================================================


@dataclass(frozen=True)
class VerifyResult:
    exit_code: int
    report: ScenarioReport

    @property
    def disagreements(self) -> List[ReplicateRow]:
        return self.report.disagreements


def verify_identity(config: ScenarioConfig, run_logger: Optional[RunLogger] = None) -> VerifyResult:
    """Exit 0 iff detector and oracle agree on every replicate, else 1"""
    if not config.guaranteed:
        logger.warning(
            f"[WARN] Schedule {config.schedule} is not the guaranteed schedule; "
            "disagreements are expected"
        )
    report = run_scenario(config, run_logger)
    code = 0 if not report.disagreements else 1
    if code:
        logger.error(f"[FAIL] {len(report.disagreements)} disagreement(s) in {config.scenario_id}")
    return VerifyResult(code, report)


# =============================================================================
# Output
# =============================================================================


def _bool(value: bool) -> str:
    return "true" if value else "false"


def csv_row(row: ReplicateRow, record_timings: bool) -> List[str]:
    p, q, inc = row.witness if row.witness else ("", "", "")
    return [
        row.scenario_id,
        str(row.replicate),
        str(row.subseed),
        _bool(row.oracle_event),
        row.oracle_branch.value,
        format_rational(row.oracle_time),
        _bool(row.detector_overall),
        "" if row.first_reject_level is None else str(row.first_reject_level),
        "" if p == "" else format_rational(p),
        "" if q == "" else format_rational(q),
        "" if inc == "" else format_rational(inc),
        str(row.levels_run),
        str(row.total_pairs),
        row.arithmetic_mode,
        f"{row.runtime_ms:.3f}" if record_timings else "",
    ]


def emit_csv(report: ScenarioReport, path: Union[str, Path]) -> Path:
    """Header plus one row per replicate

    runtime_ms is left empty unless the scenario records timings, so repeated
    runs produce identical bytes.

    Raises:
        OSError: destination not writable
    """
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in report.rows:
            writer.writerow(csv_row(row, report.record_timings))
    logger.info(f"[OK] Wrote {len(report.rows)} rows to {path}")
    return path


def emit_sweep_csv(table: SweepTable, path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(
            ["axis", "value", "replicates", "oracle_event_rate", "detector_event_rate",
             "agreement_rate", "mean_levels", "total_pairs"]
        )
        for row in table.rows:
            writer.writerow(
                [table.axis, row.value, row.replicates,
                 format_rational(row.oracle_event_rate),
                 format_rational(row.detector_event_rate),
                 format_rational(row.agreement_rate),
                 format_rational(row.mean_levels), row.total_pairs]
            )
    return path


def format_report(report: ScenarioReport) -> str:
    """Terminal summary with the disagreement listing"""
    lines = ["", "=" * 80, f"  SCENARIO {report.scenario_id.upper()}", "=" * 80]
    lines.append(f"  Replicates:      {len(report.rows)}")
    lines.append(f"  Oracle events:   {float(report.oracle_event_rate):.3f}")
    lines.append(f"  Detector events: {float(report.detector_event_rate):.3f}")
    lines.append(f"  Agreement:       {float(report.agreement_rate):.3f}")
    lines.append(f"  Vacuous rows:    {report.vacuous_count}")
    lines.append("")
    if report.disagreements:
        lines.append("[DISAGREEMENTS]")
        lines.append("-" * 80)
        for row in report.disagreements:
            diag = row.diagnostics
            lines.append(
                f"  #{row.replicate} oracle={_bool(row.oracle_event)} ({row.oracle_branch.value}"
                f" T={format_rational(row.oracle_time)}) detector={_bool(row.detector_overall)}"
            )
            lines.append(
                f"     -> {diag.get('classification', 'unresolved')}: "
                f"first_reject_level={row.first_reject_level or '-'} "
                f"witness={format_witness(row.witness)} "
                f"levels={diag.get('levels_run')} certified={diag.get('certified_levels')} "
                f"d_min={diag.get('min_distance_to_U', '-')} m(1)={diag.get('resolution_level_1')} "
                f"vacuous={diag.get('vacuous_levels')}"
            )
        lines.append("")
    lines.append("=" * 80)
    return "\n".join(lines)


def format_sweep(table: SweepTable) -> str:
    lines = ["", "=" * 80, f"  CONVERGENCE SWEEP ALONG {table.axis}", "=" * 80]
    lines.append(f"  {'value':>8} {'oracle':>8} {'detector':>9} {'agree':>7} {'levels':>7} {'pairs':>10}")
    lines.append("-" * 80)
    for row in table.rows:
        lines.append(
            f"  {row.value:>8} {float(row.oracle_event_rate):>8.3f} "
            f"{float(row.detector_event_rate):>9.3f} {float(row.agreement_rate):>7.3f} "
            f"{float(row.mean_levels):>7.2f} {row.total_pairs:>10}"
        )
    if table.asserted:
        lines.append("")
        lines.append("  Asserted: " + "; ".join(table.asserted))
    lines.append("=" * 80)
    return "\n".join(lines)


def detect_trace(config: ScenarioConfig, replicate: int = 0) -> str:
    """Oracle result plus the full per-level detector trace for one replicate"""
    sub, path = build_path(config, replicate)
    U = config.target
    oracle = first_hitting_time(path, U)
    lines = [
        f"[ORACLE] branch={oracle.branch.value} T={format_rational(oracle.time)}"
        f" component={oracle.component or '-'} event(T<{format_rational(config.t)})="
        f"{_bool(oracle.time < config.t)}",
        f"[PATH] subseed={sub} jumps="
        + ", ".join(f"({format_rational(j.time)}, {format_rational(j.size)})" for j in path.jumps),
        f"[TARGET] U={U}",
    ]
    if oracle.branch is HitBranch.ZERO_IN_U:
        lines.append("[DETECTOR] not consulted: 0 in U forces T = 0")
        return "\n".join(lines)
    levels, diagnostics = _level_plan(config, path)
    schedule = config.schedule.bind(path, config.t)
    verdict = detect_fsigma(
        path, U, config.t, levels, schedule, full=True, float_mode=config.mode == "float"
    )
    lines.append(f"[PLAN] levels={levels} certified={diagnostics.get('certified_levels', '-')}")
    lines.append(format_trace(verdict))
    return "\n".join(lines)
