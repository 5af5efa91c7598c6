#!/usr/bin/env python3
"""
TauCheck Set Algebra
====================
Exact closed sets and F_sigma sets on the real line.

A ClosedSet is a finite union of closed intervals (points and rays allowed),
kept sorted, disjoint and non-adjacent. An FSigmaSet is an ordered list of
ClosedSet components C_1, C_2, ...; when the list is a finite prefix of an
infinite union the `truncated` flag is set.

Endpoints are Fractions; rays use the float sentinels -inf / +inf.

Usage:
    from tau_sets import normalize, enlarge, contains, ClosedInterval

    F = normalize([ClosedInterval(Fraction(1), Fraction(2))])
    E = enlarge(F, Fraction(1, 2))        # [[1/2, 5/2]]
    contains(Fraction(5, 2), E)           # True
"""

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

INF = math.inf

# Fraction for finite values, float only for the +/-inf sentinels
Extended = Union[Fraction, float]
Number = Union[Fraction, int, float]


class SetError(ValueError):
    """Raised when a set literal or a set operation precondition is invalid"""

    pass


# =============================================================================
# Rational codec ("p/q" strings, "-inf"/"+inf" sentinels)
# =============================================================================


def parse_rational(
    value: Any, allow_infinite: bool = False, allow_float: bool = False
) -> Extended:
    """Parse a config literal into an exact rational

    Accepts ints, Fractions and strings such as "3", "-1/2", "0.25" (parsed
    exactly). "-inf" / "+inf" / "inf" are accepted when allow_infinite is set.
    Python floats are rejected unless allow_float is set, in which case they are
    returned unchanged.
    """
    if isinstance(value, bool):
        raise SetError(f"Boolean is not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isinf(value) and allow_infinite:
            return value
        if allow_float and math.isfinite(value):
            return value
        raise SetError(f"Float literal {value!r} not allowed here; write it as \"p/q\"")
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "-inf"):
            if not allow_infinite:
                raise SetError(f"Infinite value not allowed here: {value!r}")
            return -INF if text.startswith("-") else INF
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise SetError(f"Not a rational literal: {value!r}")
    raise SetError(f"Unsupported rational literal: {value!r}")


def format_rational(value: Number) -> str:
    """Serialize an exact value as "p/q" (always with a denominator)"""
    if isinstance(value, float):
        if math.isinf(value):
            return "+inf" if value > 0 else "-inf"
        return repr(value)
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


# =============================================================================
# Closed intervals and closed sets
# =============================================================================


@dataclass(frozen=True)
class ClosedInterval:
    """A closed interval [lo, hi]; lo == hi is a point, infinite ends are rays"""

    lo: Extended
    hi: Extended

    def __post_init__(self):
        if self.lo == INF or self.hi == -INF:
            raise SetError(f"Interval endpoint out of range: [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise SetError(
                f"Malformed interval: lo {format_rational(self.lo)} > hi {format_rational(self.hi)}"
            )

    def contains(self, x: Number) -> bool:
        return self.lo <= x <= self.hi

    def distance(self, x: Number) -> Extended:
        if x < self.lo:
            return self.lo - x
        if x > self.hi:
            return x - self.hi
        return Fraction(0)

    def to_literal(self) -> List[str]:
        return [format_rational(self.lo), format_rational(self.hi)]

    def __str__(self) -> str:
        return "[" + ", ".join(self.to_literal()) + "]"


@dataclass(frozen=True)
class ClosedSet:
    """Finite union of closed intervals, sorted, disjoint and non-adjacent

    Build instances with normalize(); the constructor only checks the
    canonical form.
    """

    intervals: Tuple[ClosedInterval, ...] = ()

    def __post_init__(self):
        for left, right in zip(self.intervals, self.intervals[1:]):
            if not left.hi < right.lo:
                raise SetError(
                    f"Intervals {left} and {right} are not in canonical form; use normalize()"
                )

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @classmethod
    def from_literal(cls, literal: Sequence[Sequence[Any]]) -> "ClosedSet":
        """Build from [[lo, hi], ...] with "p/q" strings and inf sentinels"""
        intervals = []
        for pair in literal:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise SetError(f"Interval literal must be a [lo, hi] pair, got {pair!r}")
            lo = parse_rational(pair[0], allow_infinite=True)
            hi = parse_rational(pair[1], allow_infinite=True)
            intervals.append(ClosedInterval(lo, hi))
        return normalize(intervals)

    def to_literal(self) -> List[List[str]]:
        return [interval.to_literal() for interval in self.intervals]

    def __str__(self) -> str:
        return "[" + ", ".join(str(i) for i in self.intervals) + "]"


def normalize(intervals: Iterable[ClosedInterval]) -> ClosedSet:
    """Sort and merge overlapping or touching intervals into canonical form"""
    ordered = sorted(intervals, key=lambda i: (i.lo, i.hi))
    merged: List[ClosedInterval] = []
    for interval in ordered:
        if merged and interval.lo <= merged[-1].hi:
            last = merged[-1]
            merged[-1] = ClosedInterval(last.lo, max(last.hi, interval.hi))
        else:
            merged.append(interval)
    return ClosedSet(tuple(merged))


def distance(x: Number, F: ClosedSet) -> Extended:
    """Exact inf |x - y| over y in F; +inf for the empty set"""
    if F.is_empty:
        return INF
    los = [interval.lo for interval in F.intervals]
    idx = bisect_right(los, x) - 1
    # only the interval starting at or before x and its successor can be nearest
    candidates = [i for i in (idx, idx + 1) if 0 <= i < len(F.intervals)]
    return min(F.intervals[i].distance(x) for i in candidates)


def enlarge(F: ClosedSet, r: Number) -> ClosedSet:
    """Closed r-thickening {x : distance(x, F) <= r}"""
    if not r > 0:
        raise SetError(f"Enlargement radius must be positive, got {r}")
    return normalize(ClosedInterval(i.lo - r, i.hi + r) for i in F.intervals)


# =============================================================================
# F_sigma sets
# =============================================================================


@dataclass(frozen=True)
class FSigmaSet:
    """Countable union of closed sets, held as a finite list of components

    truncated=True marks a finite prefix of an infinite union; such a prefix
    represents a subset of the full set.
    """

    components: Tuple[ClosedSet, ...] = ()
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.components)

    def component_of(self, x: Number) -> Optional[int]:
        """Smallest 1-based component index containing x, or None"""
        for k, component in enumerate(self.components, start=1):
            if contains(x, component):
                return k
        return None

    @classmethod
    def from_literal(
        cls, literal: Sequence[Sequence[Sequence[Any]]], truncated: bool = False
    ) -> "FSigmaSet":
        return cls(tuple(ClosedSet.from_literal(c) for c in literal), truncated)

    def to_literal(self) -> List[List[List[str]]]:
        return [component.to_literal() for component in self.components]

    def __str__(self) -> str:
        body = ", ".join(f"C{k}={c}" for k, c in enumerate(self.components, start=1))
        suffix = " ..." if self.truncated else ""
        return "{" + body + suffix + "}"


def contains(x: Number, S: Union[ClosedSet, FSigmaSet]) -> bool:
    """Exact membership; OR over components for an F_sigma set"""
    if isinstance(S, FSigmaSet):
        return S.component_of(x) is not None
    if S.is_empty:
        return False
    los = [interval.lo for interval in S.intervals]
    idx = bisect_right(los, x) - 1
    return idx >= 0 and S.intervals[idx].contains(x)


def distance_to_fsigma(x: Number, U: FSigmaSet) -> Extended:
    """Minimum distance from x to any component of U (+inf if U is empty)"""
    return min((distance(x, component) for component in U.components), default=INF)


def fsigma_contains_zero(U: FSigmaSet) -> bool:
    """True iff some component contains 0 (then T is identically zero)"""
    return contains(Fraction(0), U)


def closed_fsigma(F: ClosedSet) -> FSigmaSet:
    """A closed set viewed as a one-component F_sigma set"""
    return FSigmaSet((F,), truncated=False)


def union_fsigma(*sets: FSigmaSet) -> FSigmaSet:
    """Concatenate components; truncated if any operand is"""
    components: Tuple[ClosedSet, ...] = ()
    for U in sets:
        components += U.components
    return FSigmaSet(components, any(U.truncated for U in sets))


def prefix(U: FSigmaSet, K: int) -> FSigmaSet:
    """First K components of U"""
    if K < 1:
        raise SetError(f"Component count must be >= 1, got {K}")
    return FSigmaSet(U.components[:K], U.truncated or K < len(U.components))


def open_interval_fsigma(a: Number, b: Number, K: int) -> FSigmaSet:
    """The open interval (a, b) as the truncated union of K closed pieces

    C_k = [a + (b-a)/(2(k+1)), b - (b-a)/(2(k+1))] for k = 1..K.
    """
    a, b = Fraction(a), Fraction(b)
    if a >= b:
        raise SetError(f"Open interval needs a < b, got ({a}, {b})")
    if K < 1:
        raise SetError(f"Component count must be >= 1, got {K}")
    components = []
    for k in range(1, K + 1):
        inset = (b - a) / (2 * (k + 1))
        components.append(normalize([ClosedInterval(a + inset, b - inset)]))
    return FSigmaSet(tuple(components), truncated=True)


def open_ray_fsigma(c: Number, K: int, upward: bool = True) -> FSigmaSet:
    """The open ray (c, +inf) (or (-inf, c)) as K closed rays [c + 1/k, +inf)"""
    c = Fraction(c)
    if K < 1:
        raise SetError(f"Component count must be >= 1, got {K}")
    components = []
    for k in range(1, K + 1):
        if upward:
            interval = ClosedInterval(c + Fraction(1, k), INF)
        else:
            interval = ClosedInterval(-INF, c - Fraction(1, k))
        components.append(normalize([interval]))
    return FSigmaSet(tuple(components), truncated=True)
