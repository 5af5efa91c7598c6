#!/usr/bin/env python3
"""
TauCheck Grid Detector
======================
Finite-grid evaluation of the rational-pair characterization

    (exists s in (0,t): Delta X_s in F)
        = intersection over n >= 1 of union over (p,q) in Theta_n of (X_q - X_p in E_n(F))

with Theta_n = {(p,q) rational : 0 < p < q < t, q - p <= 1/n} and E_n(F) the
closed 1/n-enlargement of F. Level n is evaluated on the lattice
{k*t/m : k = 1..m-1}, pairs enumerated by a sliding window.

Certificates (exact mode only):
    required_resolution  - grid fine enough that every jump in F is seen at level n
    rejection_level      - level at which a path with no jump in F is rejected

Both are derived sufficient conditions; a float-mode path gets no certificate
and GuaranteeUnavailable is raised instead.
"""

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

from tau_oracle import jump_distances
from tau_paths import CadlagPath, lipschitz_bound, min_jump_gap
from tau_sets import INF, ClosedSet, FSigmaSet, enlarge, format_rational

logger = logging.getLogger("TauCheck_Detector")

Value = Union[Fraction, float]
Witness = Tuple[Fraction, Fraction, Value]
ScheduleFn = Callable[[int], int]


class DetectorError(ValueError):
    """Raised for invalid detector inputs (levels, resolutions, horizons)"""

    pass


class GuaranteeUnavailable(DetectorError):
    """Raised when a certificate is requested for a float-mode path"""

    pass


class NoRejectionLevel(DetectorError):
    """Raised when a jump size or 0 lies in U, so no finite rejection level exists"""

    pass


# =============================================================================
# Grid and verdict types
# =============================================================================


@dataclass(frozen=True)
class GridSpec:
    """Level n of the detector on the lattice {k*t/m : k = 1..m-1}"""

    t: Fraction
    n: int
    m: int

    def __post_init__(self):
        if not self.t > 0:
            raise DetectorError(f"Event time must be > 0, got {self.t}")
        if self.n < 1:
            raise DetectorError(f"Level must be >= 1, got {self.n}")
        if self.m < 2:
            raise DetectorError(f"Resolution must be >= 2, got {self.m}")

    @property
    def spacing(self) -> Fraction:
        return self.t / self.m

    @property
    def window(self) -> int:
        """Largest index gap j - i with (j - i) * t/m <= 1/n"""
        return math.floor(Fraction(self.m) / (self.n * self.t))

    def point(self, k: int) -> Fraction:
        return self.t * k / self.m

    def points(self) -> List[Fraction]:
        return [self.point(k) for k in range(1, self.m)]

    def pair_total(self) -> int:
        w = self.window
        return sum(min(w, self.m - 1 - i) for i in range(1, self.m))


@dataclass(frozen=True)
class LevelVerdict:
    """One conjunct: does some grid pair at level n land in E_n(F)?"""

    n: int
    m: int
    accepted: bool
    witness: Optional[Witness]
    enlargement_used: ClosedSet
    pair_count: int
    vacuous: bool = False


@dataclass(frozen=True)
class DetectorVerdict:
    """AND over levels 1..N for a single closed set F"""

    levels: Tuple[LevelVerdict, ...]
    overall: bool
    first_reject_level: Optional[int]

    @property
    def levels_run(self) -> int:
        return len(self.levels)

    @property
    def total_pairs(self) -> int:
        return sum(level.pair_count for level in self.levels)

    @property
    def witness(self) -> Optional[Witness]:
        """Witness of the deepest accepting level"""
        for level in reversed(self.levels):
            if level.accepted:
                return level.witness
        return None

    @property
    def vacuous_levels(self) -> List[int]:
        return [level.n for level in self.levels if level.vacuous]


@dataclass(frozen=True)
class FSigmaVerdict:
    """Per-component detector verdicts for U = C_1 u C_2 u ..., OR-combined"""

    components: Tuple[DetectorVerdict, ...]
    overall: bool

    @property
    def accepting_component(self) -> Optional[int]:
        for k, verdict in enumerate(self.components, start=1):
            if verdict.overall:
                return k
        return None

    @property
    def levels_run(self) -> int:
        return sum(v.levels_run for v in self.components)

    @property
    def total_pairs(self) -> int:
        return sum(v.total_pairs for v in self.components)

    @property
    def first_reject_level(self) -> Optional[int]:
        """Level by which every component had rejected (None if any accepts)"""
        if self.overall or not self.components:
            return None
        return max(v.first_reject_level for v in self.components)

    @property
    def witness(self) -> Optional[Witness]:
        k = self.accepting_component
        return None if k is None else self.components[k - 1].witness

    @property
    def pair_counts(self) -> List[int]:
        return [level.pair_count for v in self.components for level in v.levels]


# =============================================================================
# Pair enumeration and level evaluation
# =============================================================================


def theta_pairs(spec: GridSpec) -> Iterator[Tuple[Fraction, Fraction]]:
    """Grid pairs 0 < p < q < t with q - p <= 1/n, increasing p then q"""
    w = spec.window
    for i in range(1, spec.m):
        for j in range(i + 1, min(spec.m - 1, i + w) + 1):
            yield spec.point(i), spec.point(j)


class _Membership:
    """Bisect-based membership in a (possibly scaled) closed set"""

    def __init__(self, intervals: Sequence[Tuple[Value, Value]]):
        self.los = [lo for lo, _ in intervals]
        self.his = [hi for _, hi in intervals]

    def __contains__(self, x) -> bool:
        idx = bisect_right(self.los, x) - 1
        return idx >= 0 and x <= self.his[idx]


def _scaled(values: List[Value], E: ClosedSet) -> Tuple[List[Value], _Membership, Value]:
    """Rescale exact values and E to integers over a common denominator"""
    denominators = [v.denominator for v in values]
    for interval in E.intervals:
        for end in (interval.lo, interval.hi):
            if isinstance(end, Fraction):
                denominators.append(end.denominator)
    scale = math.lcm(*denominators) if denominators else 1

    def to_int(x):
        return x if isinstance(x, float) else int(x * scale)

    ints = [to_int(v) for v in values]
    membership = _Membership([(to_int(i.lo), to_int(i.hi)) for i in E.intervals])
    return ints, membership, scale


def detect_level(
    path: CadlagPath, F: ClosedSet, spec: GridSpec, float_mode: bool = False
) -> LevelVerdict:
    """Accept iff some windowed grid increment X_q - X_p lies in E_n(F)

    The first witness in enumeration order (increasing p, then q) is kept.
    An empty pair set rejects and is flagged vacuous. float_mode (or a
    float-valued path) evaluates increments and E_n(F) as floats.
    """
    if spec.t > path.horizon:
        raise DetectorError(f"Event time {spec.t} exceeds the path horizon {path.horizon}")
    E = enlarge(F, Fraction(1, spec.n))
    total = spec.pair_total()
    if total == 0:
        logger.debug(f"[WARN] Level {spec.n} with m={spec.m} has no pairs (vacuous)")
        return LevelVerdict(spec.n, spec.m, False, None, E, 0, vacuous=True)
    if E.is_empty:
        return LevelVerdict(spec.n, spec.m, False, None, E, total)

    values: List[Value] = [path.eval(p) for p in spec.points()]
    if path.exact and not float_mode:
        keys, membership, _ = _scaled(values, E)
    else:
        values = [float(v) for v in values]
        keys = values
        membership = _Membership([(float(i.lo), float(i.hi)) for i in E.intervals])

    w = spec.window
    last = len(keys) - 1
    examined = 0
    for i in range(last + 1):
        base = keys[i]
        for j in range(i + 1, min(last, i + w) + 1):
            examined += 1
            if keys[j] - base in membership:
                witness = (spec.point(i + 1), spec.point(j + 1), values[j] - values[i])
                return LevelVerdict(spec.n, spec.m, True, witness, E, examined)
    return LevelVerdict(spec.n, spec.m, False, None, E, examined)


def detect(
    path: CadlagPath,
    F: ClosedSet,
    t: Fraction,
    N: int,
    schedule: ScheduleFn,
    full: bool = False,
    float_mode: bool = False,
) -> DetectorVerdict:
    """AND of detect_level over n = 1..N; stops at the first rejection unless full"""
    if N < 1:
        raise DetectorError(f"Max level N must be >= 1, got {N}")
    levels: List[LevelVerdict] = []
    first_reject: Optional[int] = None
    for n in range(1, N + 1):
        verdict = detect_level(path, F, GridSpec(t, n, schedule(n)), float_mode)
        levels.append(verdict)
        if not verdict.accepted and first_reject is None:
            first_reject = n
            if not full:
                break
    return DetectorVerdict(tuple(levels), first_reject is None, first_reject)


def detect_fsigma(
    path: CadlagPath,
    U: FSigmaSet,
    t: Fraction,
    N: int,
    schedule: ScheduleFn,
    full: bool = False,
    float_mode: bool = False,
) -> FSigmaVerdict:
    """Run detect per component C_k; the event is the OR over components"""
    verdicts = tuple(detect(path, C, t, N, schedule, full, float_mode) for C in U.components)
    return FSigmaVerdict(verdicts, any(v.overall for v in verdicts))


# =============================================================================
# Certificates
# =============================================================================


def _require_exact(path: CadlagPath) -> Fraction:
    L = lipschitz_bound(path)
    if L is None:
        raise GuaranteeUnavailable("Float-mode path: no Lipschitz bound, no guarantee")
    return L


def required_resolution(path: CadlagPath, F: Optional[ClosedSet], t: Fraction, n: int) -> int:
    """Smallest m with t/m <= min(1/(2n max(L,1)), g/2)

    g is the jump separation inside (0, t) including the distances to 0 and t.
    At this spacing the grid pair straddling any jump s in (0, t) isolates it
    and its increment is within 1/n of Delta X_s, so a jump in F is accepted.
    The bound does not depend on F.
    """
    L = _require_exact(path)
    if n < 1:
        raise DetectorError(f"Level must be >= 1, got {n}")
    spacing = Fraction(1, 2 * n) / max(L, Fraction(1))
    g = min_jump_gap(path, until=t)
    if g != INF:
        spacing = min(spacing, g / 2)
    return max(math.ceil(t / spacing), 2)


def rejection_level(path: CadlagPath, U: FSigmaSet, t: Fraction) -> int:
    """n* = floor((L+1)/d) + 1 with d = min(d_jump, d0)

    Past n* every windowed increment holding at most one jump is further than
    1/n from U, so the level rejects for any resolution.
    """
    L = _require_exact(path)
    per_jump, d0 = jump_distances(path, U, t)
    d = min(per_jump + [d0])
    if d == 0:
        raise NoRejectionLevel("A jump size (or 0) lies in U; no finite rejection level")
    if d == INF:
        return 1
    return math.floor((L + 1) / d) + 1


def isolation_level(path: CadlagPath, t: Fraction) -> int:
    """First level whose windows (q - p <= 1/n) hold at most one jump of (0, t)"""
    g = min_jump_gap(path, until=t)
    if g == INF:
        return 1
    return math.floor(1 / g) + 1


def certified_levels(path: CadlagPath, U: FSigmaSet, t: Fraction) -> int:
    """Level count that makes the rejection certificate apply unconditionally"""
    return max(rejection_level(path, U, t), isolation_level(path, t))


# =============================================================================
# Schedules
# =============================================================================


def default_schedule(path: CadlagPath, t: Fraction) -> ScheduleFn:
    """m(n) = max(required_resolution(n), 2*ceil(t*n) + 2)"""

    def resolution(n: int) -> int:
        return max(required_resolution(path, None, t, n), 2 * math.ceil(t * n) + 2)

    return resolution


def coverage_schedule(t: Fraction) -> ScheduleFn:
    """m(n) = 2*ceil(t*n) + 2: nonvacuous pairs, no guarantee (float mode)"""
    return lambda n: 2 * math.ceil(t * n) + 2


def fixed_schedule(base: int) -> ScheduleFn:
    if base < 2:
        raise DetectorError(f"Base resolution must be >= 2, got {base}")
    return lambda n: base


def custom_schedule(resolutions: Sequence[int]) -> ScheduleFn:
    """m(n) from an explicit list; the last entry repeats past its end"""
    if not resolutions or any(m < 2 for m in resolutions):
        raise DetectorError("Custom schedule needs resolutions >= 2")
    values = list(resolutions)
    return lambda n: values[min(n, len(values)) - 1]


# =============================================================================
# Trace formatting
# =============================================================================


def _format_value(value: Value) -> str:
    return f"{value:.6g}" if isinstance(value, float) else format_rational(value)


def format_witness(witness: Optional[Witness]) -> str:
    if witness is None:
        return "-"
    p, q, inc = witness
    return f"p={format_rational(p)} q={format_rational(q)} X_q-X_p={_format_value(inc)}"


def format_trace(verdict: Union[DetectorVerdict, FSigmaVerdict], title: str = "DETECTOR TRACE") -> str:
    """Readable per-level listing: n, m, pair count, verdict, witness"""
    components = verdict.components if isinstance(verdict, FSigmaVerdict) else (verdict,)
    lines = ["", "=" * 80, f"  {title.upper()}", "=" * 80]
    for k, component in enumerate(components, start=1):
        lines.append(f"[C{k}] overall={'ACCEPT' if component.overall else 'REJECT'}"
                     f" first_reject_level={component.first_reject_level or '-'}")
        lines.append("-" * 80)
        for level in component.levels:
            status = "ACCEPT" if level.accepted else ("VACUOUS" if level.vacuous else "REJECT")
            lines.append(
                f"  n={level.n:<4} m={level.m:<6} pairs={level.pair_count:<8} {status:<8}"
                f" E_n(F)={level.enlargement_used}  {format_witness(level.witness)}"
            )
        lines.append("")
    if isinstance(verdict, FSigmaVerdict):
        lines.append(f"  OVERALL (OR over components): {'ACCEPT' if verdict.overall else 'REJECT'}")
    lines.append("=" * 80)
    return "\n".join(lines)
