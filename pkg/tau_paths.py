#!/usr/bin/env python3
"""
TauCheck Path Model
===================
Exact, finite-activity cadlag paths with an explicit jump list.

    X_t = continuous(t) + sum of jump sizes with time <= t

The continuous part is piecewise linear with rational breakpoints, so every
value at a rational time is an exact Fraction. A Brownian continuous part is
available for float-mode stress runs; paths built with it report exact=False
and carry no Lipschitz bound.

Usage:
    from tau_paths import CadlagPath, JumpSpec, linear_part

    path = CadlagPath(Fraction(1), linear_part(Fraction(1), 0), (JumpSpec(Fraction(1, 2), Fraction(1)),))
    path.eval(Fraction(1, 2))        # 1
    path.left_limit(Fraction(1, 2))  # 0
"""

import hashlib
import logging
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from tau_sets import INF, Extended, format_rational, parse_rational

logger = logging.getLogger("TauCheck_Paths")

Value = Union[Fraction, float]


class PathError(ValueError):
    """Raised for invalid path data or out-of-range evaluation times"""

    pass


@dataclass(frozen=True)
class JumpSpec:
    """A jump of `size` at `time`; time > 0 so that X_{0-} = X_0"""

    time: Fraction
    size: Fraction

    def __post_init__(self):
        if not self.time > 0:
            raise PathError(f"Jump time must be > 0, got {self.time}")
        if self.size == 0:
            raise PathError(f"Zero-size jump at {self.time} is not a jump")


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function through (time, value) breakpoints

    exact=False marks float-valued parts (Brownian stress mode).
    """

    breakpoints: Tuple[Tuple[Fraction, Value], ...]
    exact: bool = True
    _times: Tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.breakpoints) < 2:
            raise PathError("Piecewise-linear part needs at least two breakpoints")
        if self.breakpoints[0][0] != 0:
            raise PathError(f"First breakpoint must be at time 0, got {self.breakpoints[0][0]}")
        times = tuple(t for t, _ in self.breakpoints)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise PathError("Breakpoint times must be strictly increasing")
        object.__setattr__(self, "_times", times)

    @property
    def end(self) -> Fraction:
        return self.breakpoints[-1][0]

    def __call__(self, t: Fraction) -> Value:
        idx = bisect_right(self._times, t)
        if idx >= len(self.breakpoints):
            return self.breakpoints[-1][1]
        if idx == 0:
            return self.breakpoints[0][1]
        (t0, v0), (t1, v1) = self.breakpoints[idx - 1], self.breakpoints[idx]
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0)

    def slopes(self) -> List[Value]:
        return [
            (v1 - v0) / (t1 - t0)
            for (t0, v0), (t1, v1) in zip(self.breakpoints, self.breakpoints[1:])
        ]


@dataclass(frozen=True)
class CadlagPath:
    """Right-continuous path with left limits on [0, horizon]"""

    horizon: Fraction
    continuous: PiecewiseLinear
    jumps: Tuple[JumpSpec, ...] = ()
    _times: Tuple[Fraction, ...] = field(init=False, repr=False, compare=False)
    _cumulative: Tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.horizon > 0:
            raise PathError(f"Horizon must be > 0, got {self.horizon}")
        if self.continuous.end != self.horizon:
            raise PathError(
                f"Continuous part ends at {self.continuous.end}, horizon is {self.horizon}"
            )
        times = tuple(j.time for j in self.jumps)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise PathError("Jump times must be sorted and distinct")
        if times and times[-1] > self.horizon:
            raise PathError(f"Jump at {times[-1]} lies after the horizon {self.horizon}")

        cumulative = [Fraction(0)]
        for jump in self.jumps:
            cumulative.append(cumulative[-1] + jump.size)
        object.__setattr__(self, "_times", times)
        object.__setattr__(self, "_cumulative", tuple(cumulative))

    @property
    def exact(self) -> bool:
        return self.continuous.exact

    def _check_time(self, t: Fraction):
        if not 0 <= t <= self.horizon:
            raise PathError(f"Time {t} outside [0, {self.horizon}]")

    def eval(self, t: Fraction) -> Value:
        """X_t: continuous part plus all jumps at times <= t"""
        self._check_time(t)
        return self.continuous(t) + self._cumulative[bisect_right(self._times, t)]

    def left_limit(self, t: Fraction) -> Value:
        """X_{t-}: continuous part plus all jumps at times < t; X_{0-} = X_0"""
        self._check_time(t)
        return self.continuous(t) + self._cumulative[bisect_left(self._times, t)]

    def jump_size(self, t: Fraction) -> Value:
        """Delta X_t = X_t - X_{t-}; nonzero only at listed jump times"""
        return self.eval(t) - self.left_limit(t)

    def jumps_before(self, t: Fraction) -> Tuple[JumpSpec, ...]:
        """Jumps with time strictly inside (0, t)"""
        return self.jumps[: bisect_left(self._times, t)]


def lipschitz_bound(path: CadlagPath) -> Optional[Fraction]:
    """Max absolute slope of the continuous part; None for float-mode paths"""
    if not path.exact:
        return None
    return max((abs(s) for s in path.continuous.slopes()), default=Fraction(0))


def min_jump_gap(path: CadlagPath, until: Optional[Fraction] = None) -> Extended:
    """Smallest separation between jump times and the window ends

    With `until`, considers jumps strictly before it (the detector window
    (0, t)). Without it, every jump in (0, horizon] counts, so a jump at the
    horizon gives 0. Gaps are consecutive jump separations plus the distances
    to 0 and to the window end. +inf when there are no such jumps.
    """
    if until is None:
        end = path.horizon
        jumps = path.jumps
    else:
        end = until
        jumps = path.jumps_before(until)
    times = [j.time for j in jumps]
    if not times:
        return INF
    gaps = [times[0], end - times[-1]]
    gaps.extend(b - a for a, b in zip(times, times[1:]))
    return min(gaps)


# =============================================================================
# Continuous-part builders
# =============================================================================


def constant_part(horizon: Fraction, value: Value = Fraction(0)) -> PiecewiseLinear:
    return PiecewiseLinear(((Fraction(0), value), (horizon, value)))


def linear_part(
    horizon: Fraction, slope: Fraction, initial: Fraction = Fraction(0)
) -> PiecewiseLinear:
    return PiecewiseLinear(
        ((Fraction(0), initial), (horizon, initial + slope * horizon))
    )


def random_walk_part(
    rng: np.random.Generator,
    horizon: Fraction,
    steps: int,
    max_slope: Fraction,
    slope_denominator: int,
    initial: Fraction = Fraction(0),
) -> PiecewiseLinear:
    """Exact piecewise-linear walk with slopes on the lattice k/slope_denominator"""
    if steps < 1 or slope_denominator < 1:
        raise PathError("Random walk needs steps >= 1 and slope_denominator >= 1")
    top = math.floor(max_slope * slope_denominator)
    slopes = rng.integers(-top, top + 1, size=steps)
    dt = horizon / steps
    points = [(Fraction(0), initial)]
    for k, numerator in enumerate(slopes, start=1):
        value = points[-1][1] + Fraction(int(numerator), slope_denominator) * dt
        points.append((dt * k, value))
    return PiecewiseLinear(tuple(points))


def brownian_part(
    rng: np.random.Generator,
    horizon: Fraction,
    steps: int,
    sigma: float,
    initial: float = 0.0,
) -> PiecewiseLinear:
    """Float-valued Brownian motion interpolated linearly; flagged inexact"""
    if steps < 1:
        raise PathError("Brownian part needs steps >= 1")
    dt = float(horizon) / steps
    increments = rng.normal(0.0, sigma * math.sqrt(dt), size=steps)
    values = float(initial) + np.concatenate(([0.0], np.cumsum(increments)))
    points = tuple(
        (horizon * k / steps, float(v)) for k, v in enumerate(values)
    )
    return PiecewiseLinear(points, exact=False)


@dataclass(frozen=True)
class ContinuousSpec:
    """Recipe for the continuous part of generated paths

    kind: "constant" | "linear" | "breakpoints" | "random_walk" | "brownian"
    """

    kind: str = "constant"
    initial: Fraction = Fraction(0)
    slope: Fraction = Fraction(0)
    breakpoints: Tuple[Tuple[Fraction, Fraction], ...] = ()
    steps: int = 16
    max_slope: Fraction = Fraction(1)
    slope_denominator: int = 4
    sigma: float = 0.25

    KINDS = ("constant", "linear", "breakpoints", "random_walk", "brownian")

    @property
    def exact(self) -> bool:
        return self.kind != "brownian"

    def build(self, rng: np.random.Generator, horizon: Fraction) -> PiecewiseLinear:
        if self.kind == "constant":
            return constant_part(horizon, self.initial)
        if self.kind == "linear":
            return linear_part(horizon, self.slope, self.initial)
        if self.kind == "breakpoints":
            return PiecewiseLinear(self.breakpoints)
        if self.kind == "random_walk":
            return random_walk_part(
                rng, horizon, self.steps, self.max_slope, self.slope_denominator, self.initial
            )
        if self.kind == "brownian":
            return brownian_part(rng, horizon, self.steps, self.sigma, float(self.initial))
        raise PathError(f"Unknown continuous part kind: {self.kind}")


# =============================================================================
# Jump-size distributions and the compound Poisson generator
# =============================================================================


@dataclass(frozen=True)
class SizeDistribution:
    """Lattice-valued jump-size law with finite support (zero excluded)"""

    support: Tuple[Fraction, ...]
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if not self.support:
            raise PathError("Size distribution needs a nonempty support")
        if any(s == 0 for s in self.support):
            raise PathError("Size distribution support must not contain 0")
        if self.weights is not None:
            if len(self.weights) != len(self.support):
                raise PathError("Size weights must match the support length")
            if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
                raise PathError("Size weights must be nonnegative with positive total")

    @classmethod
    def lattice_range(cls, low: Fraction, high: Fraction, denominator: int) -> "SizeDistribution":
        """Uniform law on the nonzero multiples of 1/denominator in [low, high]"""
        if denominator < 1:
            raise PathError(f"Size denominator must be >= 1, got {denominator}")
        first = math.ceil(low * denominator)
        last = math.floor(high * denominator)
        support = tuple(
            Fraction(k, denominator) for k in range(first, last + 1) if k != 0
        )
        return cls(support)

    def __call__(self, rng: np.random.Generator, count: int) -> List[Fraction]:
        if count == 0:
            return []
        p = None
        if self.weights is not None:
            total = float(sum(self.weights))
            p = [w / total for w in self.weights]
        picks = rng.choice(len(self.support), size=count, p=p)
        return [self.support[int(i)] for i in picks]


def gen_compound_poisson(
    seed: Union[int, np.random.Generator],
    rate: Fraction,
    horizon: Fraction,
    size_sampler: SizeDistribution,
    time_denominator: int,
    continuous: Optional[ContinuousSpec] = None,
) -> CadlagPath:
    """Seeded compound Poisson path with jump times on the lattice {k/D}

    The jump count is Poisson(rate * horizon); times are drawn without
    replacement from {k/D : 0 < k/D <= horizon}.
    """
    if not rate > 0:
        raise PathError(f"Jump rate must be > 0, got {rate}")
    if time_denominator < 1:
        raise PathError(f"Time denominator must be >= 1, got {time_denominator}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    count = int(rng.poisson(float(rate * horizon)))
    grid_size = math.floor(horizon * time_denominator)
    if count > grid_size:
        raise PathError(
            f"Drew {count} jumps but the time lattice only has {grid_size} points"
        )
    ticks = sorted(int(k) + 1 for k in rng.choice(grid_size, size=count, replace=False))
    sizes = size_sampler(rng, count)
    jumps = tuple(
        JumpSpec(Fraction(k, time_denominator), size) for k, size in zip(ticks, sizes)
    )
    part = (continuous or ContinuousSpec()).build(rng, horizon)
    logger.debug(f"Generated path with {count} jumps on lattice 1/{time_denominator}")
    return CadlagPath(horizon, part, jumps)


def with_planted_jumps(path: CadlagPath, planted: Iterable[JumpSpec]) -> CadlagPath:
    """Overlay fixed jumps; a planted jump replaces a generated one at the same time"""
    by_time: Dict[Fraction, JumpSpec] = {j.time: j for j in path.jumps}
    for jump in planted:
        by_time[jump.time] = jump
    jumps = tuple(by_time[t] for t in sorted(by_time))
    return CadlagPath(path.horizon, path.continuous, jumps)


def subseed(seed: int, replicate: int) -> int:
    """Counter-derived 64-bit subseed: first 8 bytes of sha256("taucheck:<seed>:<replicate>")"""
    digest = hashlib.sha256(f"taucheck:{seed}:{replicate}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


# =============================================================================
# Fixture (de)serialization
# =============================================================================


def _format_value(value: Value) -> Any:
    return value if isinstance(value, float) else format_rational(value)


def path_to_fixture(path: CadlagPath) -> Dict[str, Any]:
    """Config-format dict: rationals as "p/q", float values kept as numbers"""
    return {
        "horizon": format_rational(path.horizon),
        "exact": path.exact,
        "breakpoints": [
            [format_rational(t), _format_value(v)] for t, v in path.continuous.breakpoints
        ],
        "jumps": [[format_rational(j.time), format_rational(j.size)] for j in path.jumps],
    }


def path_from_fixture(data: Dict[str, Any]) -> CadlagPath:
    """Inverse of path_to_fixture; float breakpoint values require exact=false"""
    try:
        horizon = parse_rational(data["horizon"])
        exact = bool(data.get("exact", True))
        breakpoints = tuple(
            (parse_rational(t), parse_rational(v, allow_float=not exact))
            for t, v in data["breakpoints"]
        )
        jumps = tuple(
            JumpSpec(parse_rational(t), parse_rational(s)) for t, s in data.get("jumps", [])
        )
    except (KeyError, TypeError) as e:
        raise PathError(f"Malformed path fixture: {e}")
    return CadlagPath(horizon, PiecewiseLinear(breakpoints, exact=exact), jumps)


def jump_list(pairs: Sequence[Sequence[Any]]) -> Tuple[JumpSpec, ...]:
    """Parse [[time, size], ...] literals into sorted JumpSpecs"""
    jumps = [JumpSpec(parse_rational(t), parse_rational(s)) for t, s in pairs]
    return tuple(sorted(jumps, key=lambda j: j.time))
