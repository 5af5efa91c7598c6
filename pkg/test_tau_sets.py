#!/usr/bin/env python3
"""
Set Algebra Tests
=================
normalize / distance / enlarge on closed sets, F_sigma constructors and the
"p/q" literal codec.

Run: python test_tau_sets.py   (or pytest)
"""

import sys
from fractions import Fraction as Fr

import numpy as np
import pytest

from tau_sets import (
    INF,
    ClosedInterval,
    ClosedSet,
    FSigmaSet,
    SetError,
    closed_fsigma,
    contains,
    distance,
    distance_to_fsigma,
    enlarge,
    format_rational,
    fsigma_contains_zero,
    normalize,
    open_interval_fsigma,
    open_ray_fsigma,
    parse_rational,
    prefix,
    union_fsigma,
)


def closed(*pairs) -> ClosedSet:
    return normalize([ClosedInterval(Fr(lo), Fr(hi)) for lo, hi in pairs])


# =============================================================================
# normalize
# =============================================================================


@pytest.mark.parametrize(
    "pairs, expected",
    [
        ([(1, 3), (2, 5)], [(1, 5)]),
        ([(1, 2), (2, 3)], [(1, 3)]),
        ([(4, 5), (1, 2)], [(1, 2), (4, 5)]),
        ([(1, 1), (1, 1)], [(1, 1)]),
        ([], []),
    ],
)
def test_normalize_merges_overlapping_and_touching(pairs, expected):
    F = closed(*pairs)
    assert [(i.lo, i.hi) for i in F.intervals] == [(Fr(a), Fr(b)) for a, b in expected]


def test_normalize_is_idempotent():
    F = closed((0, 1), (Fr(1, 2), 3), (5, 6))
    assert normalize(F.intervals) == F


def test_malformed_interval_rejected():
    with pytest.raises(SetError):
        ClosedInterval(Fr(3), Fr(1))


def test_non_canonical_closed_set_rejected():
    with pytest.raises(SetError):
        ClosedSet((ClosedInterval(Fr(0), Fr(2)), ClosedInterval(Fr(1), Fr(3))))


# =============================================================================
# distance / enlarge
# =============================================================================


def test_distance_examples():
    F = closed((1, 2), (5, 6))
    assert distance(Fr(0), F) == 1
    assert distance(Fr(3), F) == 1
    assert distance(Fr(4), F) == 1
    assert distance(Fr(7, 2), F) == Fr(3, 2)
    assert distance(Fr(3, 2), F) == 0
    assert distance(Fr(10), F) == 4


def test_distance_to_empty_set_is_infinite():
    assert distance(Fr(0), ClosedSet()) == INF


def test_distance_to_ray():
    F = ClosedSet.from_literal([["1", "+inf"]])
    assert distance(Fr(10**6), F) == 0
    assert distance(Fr(-1), F) == 2


def test_enlarge_example():
    E = enlarge(closed((1, 2)), Fr(1, 2))
    assert E == closed((Fr(1, 2), Fr(5, 2)))
    assert contains(Fr(5, 2), E)
    assert not contains(Fr(26, 10), E)


def test_enlarge_merges_nearby_intervals():
    E = enlarge(closed((0, 1), (2, 3)), Fr(1, 2))
    assert E == closed((Fr(-1, 2), Fr(7, 2)))


@pytest.mark.parametrize("r", [Fr(0), Fr(-1)])
def test_enlarge_rejects_non_positive_radius(r):
    with pytest.raises(SetError):
        enlarge(closed((0, 1)), r)


def test_enlargement_law_randomized():
    """contains(x, enlarge(F, r)) iff distance(x, F) <= r, exactly"""
    rng = np.random.default_rng(11)
    for _ in range(2000):
        cuts = sorted(Fr(int(v), 8) for v in rng.integers(-40, 40, size=4))
        F = closed((cuts[0], cuts[1]), (cuts[2], cuts[3]))
        x = Fr(int(rng.integers(-60, 60)), 16)
        r = Fr(int(rng.integers(1, 24)), 8)
        assert contains(x, enlarge(F, r)) == (distance(x, F) <= r)


def test_enlargement_is_monotone_and_contains_f():
    F = closed((0, 1), (3, 4))
    small, large = enlarge(F, Fr(1, 4)), enlarge(F, Fr(1, 2))
    for x in [Fr(k, 8) for k in range(-8, 40)]:
        if contains(x, F):
            assert contains(x, small)
        if contains(x, small):
            assert contains(x, large)


def test_point_outside_leaves_fine_enlargements():
    F = closed((1, 2))
    x = Fr(5, 2)
    n = int(1 / distance(x, F)) + 1
    assert not contains(x, enlarge(F, Fr(1, n)))


# =============================================================================
# F_sigma sets
# =============================================================================


def test_open_interval_components():
    U = open_interval_fsigma(0, 1, 3)
    assert U.truncated
    assert [c.intervals[0].lo for c in U.components] == [Fr(1, 4), Fr(1, 6), Fr(1, 8)]
    assert [c.intervals[0].hi for c in U.components] == [Fr(3, 4), Fr(5, 6), Fr(7, 8)]
    assert U.component_of(Fr(1, 2)) == 1
    assert U.component_of(Fr(1, 5)) == 2
    assert U.component_of(Fr(0)) is None
    assert U.component_of(Fr(1)) is None


@pytest.mark.parametrize("a, b, K", [(1, 1, 2), (2, 1, 2), (0, 1, 0)])
def test_open_interval_rejects_bad_arguments(a, b, K):
    with pytest.raises(SetError):
        open_interval_fsigma(a, b, K)


def test_open_ray_components():
    up = open_ray_fsigma(1, 2)
    assert up.components[0] == ClosedSet.from_literal([["2", "+inf"]])
    assert up.components[1] == ClosedSet.from_literal([["3/2", "+inf"]])
    down = open_ray_fsigma(0, 1, upward=False)
    assert contains(Fr(-5), down)
    assert not contains(Fr(-1, 2), down)


def test_zero_membership():
    assert fsigma_contains_zero(FSigmaSet.from_literal([[["-1", "1"]]]))
    assert not fsigma_contains_zero(open_interval_fsigma(0, 1, 10))


def test_distance_to_fsigma_takes_the_nearest_component():
    U = FSigmaSet.from_literal([[["3", "4"]], [["1", "2"]]])
    assert distance_to_fsigma(Fr(0), U) == 1
    assert distance_to_fsigma(Fr(0), FSigmaSet()) == INF


def test_prefix_and_union():
    U = open_interval_fsigma(0, 1, 4)
    head = prefix(U, 2)
    assert len(head) == 2 and head.truncated
    F = closed_fsigma(closed((5, 6)))
    assert not F.truncated
    both = union_fsigma(F, head)
    assert len(both) == 3 and both.truncated
    with pytest.raises(SetError):
        prefix(U, 0)


def test_truncated_prefix_is_a_subset():
    U = open_interval_fsigma(Fr(1, 2), Fr(3, 2), 6)
    for K in range(1, 6):
        small, large = prefix(U, K), prefix(U, K + 1)
        for x in [Fr(k, 64) for k in range(0, 128)]:
            if contains(x, small):
                assert contains(x, large)


# =============================================================================
# Literal codec
# =============================================================================


@pytest.mark.parametrize(
    "text, value",
    [("3", Fr(3)), ("-1/2", Fr(-1, 2)), ("0.25", Fr(1, 4)), (" 7/4 ", Fr(7, 4))],
)
def test_parse_rational(text, value):
    assert parse_rational(text) == value


def test_parse_rational_infinities_only_when_allowed():
    assert parse_rational("-inf", allow_infinite=True) == -INF
    with pytest.raises(SetError):
        parse_rational("+inf")


@pytest.mark.parametrize("bad", ["abc", "1/0", 0.5, True, None])
def test_parse_rational_rejects(bad):
    with pytest.raises(SetError):
        parse_rational(bad)


def test_format_rational_always_has_denominator():
    assert format_rational(Fr(3)) == "3/1"
    assert format_rational(Fr(-7, 4)) == "-7/4"
    assert format_rational(INF) == "+inf"
    assert format_rational(-INF) == "-inf"


def test_literal_round_trip():
    literal = [[["-inf", "-2"], ["1/3", "1/2"]], [["5", "+inf"]]]
    U = FSigmaSet.from_literal(literal)
    assert FSigmaSet.from_literal(U.to_literal()) == U
    assert U.to_literal()[0][1] == ["1/3", "1/2"]


def test_bad_literal_rejected():
    with pytest.raises(SetError):
        ClosedSet.from_literal([["1"]])


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
