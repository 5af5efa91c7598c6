#!/usr/bin/env python3
"""
TauCheck Hitting Oracle
=======================
Ground truth for T = inf{t >= 0 : Delta X_t in U} from the explicit jump list.

Delta X vanishes off the jump list, so when 0 is in U the zero times are dense
at 0 and T = 0 without scanning. Otherwise T is the earliest jump whose size
lies in U, or +inf.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

from tau_paths import CadlagPath
from tau_sets import (
    INF,
    Extended,
    FSigmaSet,
    distance_to_fsigma,
    fsigma_contains_zero,
)


class OracleError(ValueError):
    """Raised for an event time outside (0, horizon]"""

    pass


class HitBranch(Enum):
    """How the hitting time was resolved"""

    ZERO_IN_U = "zero_in_U"
    JUMP_HIT = "jump_hit"
    NEVER = "never"


@dataclass(frozen=True)
class HittingResult:
    """First hitting time with the component that caught it (1-based)"""

    time: Extended
    branch: HitBranch
    component: Optional[int] = None


def first_hitting_time(path: CadlagPath, U: FSigmaSet) -> HittingResult:
    if fsigma_contains_zero(U):
        return HittingResult(Fraction(0), HitBranch.ZERO_IN_U)
    for jump in path.jumps:
        k = U.component_of(jump.size)
        if k is not None:
            return HittingResult(jump.time, HitBranch.JUMP_HIT, k)
    return HittingResult(INF, HitBranch.NEVER)


def _check_event_time(path: CadlagPath, t: Fraction):
    if not 0 < t <= path.horizon:
        raise OracleError(f"Event time t={t} outside (0, {path.horizon}]")


def event_before(path: CadlagPath, U: FSigmaSet, t: Fraction) -> bool:
    """(T < t), strict: a jump exactly at t does not count"""
    _check_event_time(path, t)
    return first_hitting_time(path, U).time < t


def hit_witness(
    path: CadlagPath, U: FSigmaSet, t: Fraction
) -> Optional[Tuple[Fraction, int]]:
    """(s, k) for the earliest qualifying jump before t; None otherwise"""
    _check_event_time(path, t)
    result = first_hitting_time(path, U)
    if result.branch is not HitBranch.JUMP_HIT or not result.time < t:
        return None
    return result.time, result.component


def jump_distances(
    path: CadlagPath, U: FSigmaSet, t: Fraction
) -> Tuple[List[Extended], Extended]:
    """Distances to U of every jump size in (0, t), and d0 = distance(0, U)"""
    _check_event_time(path, t)
    per_jump = [distance_to_fsigma(j.size, U) for j in path.jumps_before(t)]
    return per_jump, distance_to_fsigma(Fraction(0), U)
