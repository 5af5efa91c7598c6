#!/usr/bin/env python3
"""
Grid Detector Tests
===================
Pair enumeration, single-level verdicts, the level AND / component OR, the
resolution and rejection certificates, and schedules.

Run: python test_tau_detector.py   (or pytest)
"""

import sys
from fractions import Fraction as Fr

import numpy as np
import pytest

from tau_detector import (
    DetectorError,
    GridSpec,
    GuaranteeUnavailable,
    NoRejectionLevel,
    certified_levels,
    custom_schedule,
    coverage_schedule,
    default_schedule,
    detect,
    detect_fsigma,
    detect_level,
    fixed_schedule,
    format_trace,
    isolation_level,
    rejection_level,
    required_resolution,
    theta_pairs,
)
from tau_oracle import event_before
from tau_paths import (
    CadlagPath,
    JumpSpec,
    SizeDistribution,
    brownian_part,
    constant_part,
    gen_compound_poisson,
    jump_list,
    linear_part,
    with_planted_jumps,
)
from tau_sets import ClosedSet, FSigmaSet, closed_fsigma, contains, enlarge, open_interval_fsigma

ONE = Fr(1)


def point(x) -> ClosedSet:
    return ClosedSet.from_literal([[str(x), str(x)]])


def unit_jump_path() -> CadlagPath:
    """continuous = 0, one jump of size 1 at 1/2"""
    return CadlagPath(ONE, constant_part(ONE), (JumpSpec(Fr(1, 2), ONE),))


def sloped_path(slope, jumps=()) -> CadlagPath:
    return CadlagPath(ONE, linear_part(ONE, Fr(slope)), tuple(jumps))


# =============================================================================
# theta_pairs
# =============================================================================


@pytest.mark.parametrize(
    "n, m, expected",
    [
        (1, 4, [(Fr(1, 4), Fr(1, 2)), (Fr(1, 4), Fr(3, 4)), (Fr(1, 2), Fr(3, 4))]),
        (3, 4, [(Fr(1, 4), Fr(1, 2)), (Fr(1, 2), Fr(3, 4))]),
        (5, 4, []),
    ],
)
def test_theta_pairs_examples(n, m, expected):
    spec = GridSpec(ONE, n, m)
    assert list(theta_pairs(spec)) == expected
    assert spec.pair_total() == len(expected)


def test_theta_pairs_match_brute_force_filter():
    for t in (ONE, Fr(3, 4), Fr(5, 2)):
        for n in range(1, 6):
            for m in range(2, 20):
                spec = GridSpec(t, n, m)
                points = spec.points()
                brute = [
                    (p, q) for p in points for q in points if p < q and q - p <= Fr(1, n)
                ]
                pairs = list(theta_pairs(spec))
                assert pairs == brute
                assert spec.pair_total() == len(brute)
                assert all(0 < p < q < t for p, q in pairs)


@pytest.mark.parametrize("t, n, m", [(Fr(0), 1, 4), (ONE, 0, 4), (ONE, 1, 1)])
def test_grid_spec_rejects_bad_parameters(t, n, m):
    with pytest.raises(DetectorError):
        GridSpec(t, n, m)


# =============================================================================
# detect_level
# =============================================================================


def test_detect_level_accepts_with_first_witness():
    verdict = detect_level(unit_jump_path(), point(1), GridSpec(ONE, 1, 4))
    assert verdict.accepted
    assert verdict.witness == (Fr(1, 4), Fr(1, 2), Fr(1))
    assert verdict.enlargement_used == ClosedSet.from_literal([["0", "2"]])
    assert not verdict.vacuous


def test_detect_level_rejects_far_target():
    verdict = detect_level(unit_jump_path(), point(5), GridSpec(ONE, 1, 4))
    assert not verdict.accepted
    assert verdict.witness is None
    assert verdict.pair_count == 3


def test_detect_level_rejects_small_continuous_increments():
    verdict = detect_level(sloped_path(2), point(1), GridSpec(ONE, 3, 4))
    assert not verdict.accepted


def test_empty_pair_set_is_vacuous_rejection():
    verdict = detect_level(unit_jump_path(), point(1), GridSpec(ONE, 1, 2))
    assert not verdict.accepted
    assert verdict.vacuous
    assert verdict.pair_count == 0


def test_detect_level_rejects_t_beyond_horizon():
    with pytest.raises(DetectorError):
        detect_level(unit_jump_path(), point(1), GridSpec(Fr(2), 1, 4))


def test_witness_satisfies_pair_predicate_and_enlargement():
    sizes = SizeDistribution((Fr(-1), Fr(1, 2), Fr(1), Fr(7, 4)))
    F = ClosedSet.from_literal([["3/2", "2"]])
    for seed in range(40):
        path = gen_compound_poisson(seed, Fr(3), ONE, sizes, 16)
        for n in (1, 2, 4):
            spec = GridSpec(ONE, n, 4 * n + 2)
            verdict = detect_level(path, F, spec)
            if verdict.accepted:
                p, q, inc = verdict.witness
                assert 0 < p < q < ONE and q - p <= Fr(1, n)
                assert inc == path.eval(q) - path.eval(p)
                assert contains(inc, enlarge(F, Fr(1, n)))


def test_float_path_detects_with_float_increments():
    rng = np.random.default_rng(4)
    path = CadlagPath(ONE, brownian_part(rng, ONE, 32, 0.01), (JumpSpec(Fr(1, 2), Fr(7, 4)),))
    verdict = detect_level(path, ClosedSet.from_literal([["3/2", "2"]]), GridSpec(ONE, 4, 40))
    assert verdict.accepted
    assert isinstance(verdict.witness[2], float)


def test_float_mode_on_exact_path_uses_float_increments():
    exact = detect_level(unit_jump_path(), point(1), GridSpec(ONE, 1, 4))
    floated = detect_level(unit_jump_path(), point(1), GridSpec(ONE, 1, 4), float_mode=True)
    assert floated.accepted == exact.accepted
    p, q, inc = floated.witness
    assert (p, q) == (Fr(1, 4), Fr(1, 2))
    assert isinstance(inc, float) and inc == 1.0
    verdict = detect_fsigma(
        unit_jump_path(), closed_fsigma(point(1)), ONE, 3, coverage_schedule(ONE), float_mode=True
    )
    assert verdict.overall
    assert isinstance(verdict.witness[2], float)


# =============================================================================
# detect / detect_fsigma
# =============================================================================


def test_detect_short_circuits_on_first_rejection():
    verdict = detect(unit_jump_path(), point(5), ONE, 6, coverage_schedule(ONE))
    assert not verdict.overall
    assert verdict.first_reject_level == 1
    assert verdict.levels_run == 1


def test_detect_full_keeps_sweeping():
    verdict = detect(unit_jump_path(), point(5), ONE, 6, coverage_schedule(ONE), full=True)
    assert verdict.levels_run == 6
    assert verdict.first_reject_level == 1


def test_detect_accepts_planted_jump_at_every_level():
    path = unit_jump_path()
    verdict = detect(path, point(1), ONE, 8, default_schedule(path, ONE))
    assert verdict.overall
    assert verdict.first_reject_level is None
    assert verdict.levels_run == 8
    p, q, _ = verdict.witness
    assert p < Fr(1, 2) <= q


def test_detect_rejects_zero_levels():
    with pytest.raises(DetectorError):
        detect(unit_jump_path(), point(1), ONE, 0, coverage_schedule(ONE))


def test_detect_fsigma_ors_components():
    path = unit_jump_path()
    U = FSigmaSet.from_literal([[["1", "1"]], [["5", "5"]]])
    verdict = detect_fsigma(path, U, ONE, 4, default_schedule(path, ONE))
    assert verdict.overall
    assert verdict.accepting_component == 1
    assert verdict.components[0].overall and not verdict.components[1].overall
    assert verdict.first_reject_level is None


def test_detect_fsigma_empty_target_is_false():
    path = unit_jump_path()
    verdict = detect_fsigma(path, FSigmaSet(), ONE, 4, coverage_schedule(ONE))
    assert not verdict.overall
    assert verdict.levels_run == 0


def test_fsigma_first_reject_level_is_the_last_component_rejection():
    path = unit_jump_path()
    U = FSigmaSet.from_literal([[["5", "5"]], [["3/2", "3/2"]]])
    verdict = detect_fsigma(path, U, ONE, 8, default_schedule(path, ONE))
    assert not verdict.overall
    assert verdict.first_reject_level == max(v.first_reject_level for v in verdict.components)
    assert verdict.first_reject_level >= 2


# =============================================================================
# Certificates
# =============================================================================


def test_required_resolution_examples():
    jumps_quarter = jump_list([["1/4", "1"], ["1/2", "1"], ["3/4", "1"]])
    assert required_resolution(CadlagPath(ONE, constant_part(ONE), jumps_quarter), None, ONE, 2) == 8
    assert required_resolution(sloped_path(2, [JumpSpec(Fr(1, 2), ONE)]), None, ONE, 1) == 4
    assert required_resolution(sloped_path(1), None, ONE, 3) == 6


def test_rejection_level_examples():
    assert rejection_level(sloped_path(2), closed_fsigma(point(1)), ONE) == 4
    path = CadlagPath(ONE, constant_part(ONE), (JumpSpec(Fr(1, 2), Fr(1, 2)),))
    assert rejection_level(path, closed_fsigma(point(1)), ONE) == 3


def test_rejection_level_undefined_when_a_jump_lies_in_u():
    with pytest.raises(NoRejectionLevel):
        rejection_level(unit_jump_path(), closed_fsigma(point(1)), ONE)


def test_certificates_unavailable_in_float_mode():
    path = CadlagPath(ONE, brownian_part(np.random.default_rng(0), ONE, 8, 0.1))
    with pytest.raises(GuaranteeUnavailable):
        required_resolution(path, None, ONE, 1)
    with pytest.raises(GuaranteeUnavailable):
        rejection_level(path, closed_fsigma(point(1)), ONE)


def test_isolation_and_certified_levels():
    path = CadlagPath(ONE, constant_part(ONE), jump_list([["1/8", "-1"], ["1/4", "-1"]]))
    U = closed_fsigma(ClosedSet.from_literal([["1", "2"]]))
    assert isolation_level(path, ONE) == 9
    assert rejection_level(path, U, ONE) == 2
    assert certified_levels(path, U, ONE) == 9
    assert isolation_level(sloped_path(1), ONE) == 1


def test_two_jumps_in_one_window_need_the_isolation_level():
    """Jumps 1/2 + 1/2 sum to 1 inside U when a window holds both"""
    path = CadlagPath(ONE, constant_part(ONE), jump_list([["1/2", "1/2"], ["9/16", "1/2"]]))
    U = closed_fsigma(point(1))
    schedule = default_schedule(path, ONE)
    n_star = rejection_level(path, U, ONE)
    assert n_star == 3
    assert detect_level(path, point(1), GridSpec(ONE, n_star, schedule(n_star))).accepted
    N = certified_levels(path, U, ONE)
    assert not detect_fsigma(path, U, ONE, N, schedule).overall
    assert not event_before(path, U, ONE)


def test_completeness_at_required_resolution():
    sizes = SizeDistribution((Fr(-1), Fr(-1, 2), Fr(1, 2), Fr(1)))
    F = ClosedSet.from_literal([["3/2", "2"]])
    for seed in range(60):
        base = gen_compound_poisson(seed, Fr(3), ONE, sizes, 32)
        path = with_planted_jumps(base, [JumpSpec(Fr(17, 32), Fr(7, 4))])
        for n in range(1, 9):
            m = required_resolution(path, F, ONE, n)
            assert detect_level(path, F, GridSpec(ONE, n, m)).accepted


def test_refinement_and_level_monotonicity():
    sizes = SizeDistribution((Fr(-1), Fr(-1, 2), Fr(1, 2), Fr(1), Fr(7, 4)))
    F = ClosedSet.from_literal([["3/2", "2"]])
    for seed in range(30):
        path = gen_compound_poisson(seed, Fr(3), ONE, sizes, 16)
        for n in range(1, 5):
            for m in (3, 6, 12):
                coarse = detect_level(path, F, GridSpec(ONE, n, m)).accepted
                fine = detect_level(path, F, GridSpec(ONE, n, 2 * m)).accepted
                deeper = detect_level(path, F, GridSpec(ONE, n + 1, m)).accepted
                assert not coarse or fine
                assert not deeper or coarse


def test_truncated_components_monotone_in_k():
    sizes = SizeDistribution((Fr(-1), Fr(1, 2), Fr(9, 16), Fr(1), Fr(7, 4)))
    for seed in range(30):
        path = gen_compound_poisson(seed, Fr(3), ONE, sizes, 32)
        schedule = default_schedule(path, ONE)
        previous = False
        for K in range(1, 7):
            U = open_interval_fsigma(Fr(1, 2), Fr(3, 2), K)
            overall = detect_fsigma(path, U, ONE, 4, schedule).overall
            assert overall or not previous
            previous = overall


# =============================================================================
# Schedules and trace
# =============================================================================


def test_default_schedule_is_nonvacuous_without_jumps():
    path = CadlagPath(ONE, constant_part(ONE))
    schedule = default_schedule(path, ONE)
    assert [schedule(n) for n in (1, 2, 3)] == [4, 6, 8]
    assert all(GridSpec(ONE, n, schedule(n)).pair_total() > 0 for n in range(1, 20))


def test_fixed_and_custom_schedules():
    assert fixed_schedule(5)(7) == 5
    custom = custom_schedule([4, 8])
    assert [custom(n) for n in (1, 2, 3)] == [4, 8, 8]
    with pytest.raises(DetectorError):
        fixed_schedule(1)
    with pytest.raises(DetectorError):
        custom_schedule([])


def test_format_trace_lists_levels():
    path = unit_jump_path()
    U = FSigmaSet.from_literal([[["1", "1"]], [["5", "5"]]])
    text = format_trace(detect_fsigma(path, U, ONE, 2, fixed_schedule(2), full=True))
    assert "VACUOUS" in text
    assert "[C2]" in text
    assert "OVERALL" in text


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
