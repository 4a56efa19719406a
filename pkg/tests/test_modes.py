"""Choice catalog: universe layout, admissibility narrowing, anti-chatter."""

from __future__ import annotations

import math

import pytest

from ecodrive import _kernels
from ecodrive.engine import engine_speed
from ecodrive.modes import (DrivingMode, ModePoint, SampleContext,
                            candidate_universe, enumerate_candidates,
                            suppress_eco_roll)
from ecodrive.units import kmh_to_ms


def test_universe_has_61_members():
    universe = candidate_universe()
    assert len(universe) == 61
    assert len(set(universe)) == 61


def test_universe_order_mode_then_gear():
    universe = candidate_universe()
    assert universe[0] == ModePoint(DrivingMode.CRUISING, 1)
    assert universe[11] == ModePoint(DrivingMode.CRUISING, 12)
    assert universe[12] == ModePoint(DrivingMode.ECO_ROLL, 0)
    assert universe[13] == ModePoint(DrivingMode.COASTING, 1)
    assert universe[-1] == ModePoint(DrivingMode.MAX_ACCELERATION, 12)
    # within each in-gear block gears ascend
    for base in (0, 13, 25, 37, 49):
        gears = [q.gear for q in universe[base:base + 12]]
        assert gears == list(range(1, 13))


def test_mode_point_gear_validation():
    with pytest.raises(ValueError):
        ModePoint(DrivingMode.ECO_ROLL, 3)
    with pytest.raises(ValueError):
        ModePoint(DrivingMode.CRUISING, 0)
    with pytest.raises(ValueError):
        ModePoint(DrivingMode.COASTING, 13)
    assert ModePoint(DrivingMode.ECO_ROLL, 0).label == "eco_roll/g0"


def _ctx(v_kmh, slope=0.0, limit_kmh=80.0, prev=None):
    return SampleContext(velocity=kmh_to_ms(v_kmh), slope=slope,
                         speed_limit=kmh_to_ms(limit_kmh),
                         previously_selected=prev)


def test_suppression_needs_all_three_conditions(params):
    prev_cruise = ModePoint(DrivingMode.CRUISING, 12)
    # near the limit, resistance positive on flat, other mode before: drop
    assert suppress_eco_roll(_ctx(79.5, prev=prev_cruise), params)
    # previous sample already eco-rolling: keep
    assert not suppress_eco_roll(
        _ctx(79.5, prev=ModePoint(DrivingMode.ECO_ROLL, 0)), params)
    # no previous sample (segment end): keep
    assert not suppress_eco_roll(_ctx(79.5), params)
    # far from the limit: keep
    assert not suppress_eco_roll(_ctx(70.0, prev=prev_cruise), params)
    # gap exactly 1.5 km/h is not "within": keep
    assert not suppress_eco_roll(_ctx(78.5, prev=prev_cruise), params)


def test_suppression_sign_convention(params):
    # the drift opposes any nonzero resistance, so near the limit the rule
    # fires on uphills and downhills alike and only a perfectly balanced
    # slope (resistance exactly zero) keeps eco-roll in play
    prev = ModePoint(DrivingMode.CRUISING, 12)
    v = kmh_to_ms(79.5)
    k = params.kernel
    assert suppress_eco_roll(_ctx(79.5, slope=0.02, prev=prev), params)
    assert suppress_eco_roll(_ctx(79.5, slope=-0.03, prev=prev), params)
    lo, hi = -0.05, 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _kernels.resistance_force(v, mid, k) > 0.0:
            hi = mid
        else:
            lo = mid
    balanced = None
    for direction in (1.0, -1.0):
        s = 0.5 * (lo + hi)
        for _ in range(200_000):
            if _kernels.resistance_force(v, s, k) == 0.0:
                balanced = s
                break
            s = math.nextafter(s, direction)
        if balanced is not None:
            break
    assert balanced is not None, "no representable zero-resistance slope"
    assert not suppress_eco_roll(_ctx(79.5, slope=balanced, prev=prev), params)


def test_enumerate_respects_suppression_flag(params):
    prev = ModePoint(DrivingMode.CRUISING, 12)
    ctx = _ctx(79.5, prev=prev)
    with_suppr = enumerate_candidates(ctx, params)
    without = enumerate_candidates(ctx, params, apply_suppression=False)
    eco = ModePoint(DrivingMode.ECO_ROLL, 0)
    assert eco not in with_suppr
    assert eco in without
    assert set(without) - set(with_suppr) == {eco}


def test_low_speed_gears_are_exactly_the_rpm_window(params):
    # at 8 km/h only the short gears keep the engine above minimum speed
    v = kmh_to_ms(8.0)
    cands = enumerate_candidates(_ctx(8.0), params)
    cruise_gears = sorted(q.gear for q in cands
                          if q.mode is DrivingMode.CRUISING)
    expected = [g for g in range(1, 13)
                if params.engine_speed_min <= engine_speed(v, g, params)
                <= params.engine_speed_max]
    assert cruise_gears == expected
    assert expected  # the floor must be drivable at all


def test_enumerate_preserves_universe_order(params):
    universe = candidate_universe()
    cands = enumerate_candidates(_ctx(50.0), params)
    idx = [universe.index(q) for q in cands]
    assert idx == sorted(idx)


def test_max_gear_step_filter(params):
    prev = ModePoint(DrivingMode.CRUISING, 8)
    ctx = _ctx(50.0, prev=prev)
    free = enumerate_candidates(ctx, params)
    capped = enumerate_candidates(ctx, params, max_gear_step=1)
    assert set(capped) <= set(free)
    for q in capped:
        if q.gear >= 1:
            assert abs(q.gear - prev.gear) <= 1
    # neutral stays available regardless of the cap
    eco = ModePoint(DrivingMode.ECO_ROLL, 0)
    if eco in free:
        assert eco in capped


def test_downhill_only_offered_on_falling_grades(params):
    flat = enumerate_candidates(_ctx(50.0), params)
    descending = enumerate_candidates(_ctx(50.0, slope=math.radians(-3)), params)
    assert not any(q.mode is DrivingMode.DOWNHILL for q in flat)
    assert any(q.mode is DrivingMode.DOWNHILL for q in descending)


def test_enumerate_rejects_guard_velocity(params):
    with pytest.raises(ValueError):
        enumerate_candidates(
            SampleContext(velocity=0.05, slope=0.0, speed_limit=10.0), params)
