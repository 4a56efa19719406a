"""Longitudinal model: resistance force, per-mode dynamics, admissibility."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ecodrive.dynamics import (VELOCITY_GUARD, feasible, mode_dynamics,
                               resistance_force)
from ecodrive.modes import DrivingMode, ModePoint, ZERO_FUEL_MODES

DEG = math.radians


def test_resistance_at_standstill_is_rolling_only(params):
    assert resistance_force(0.0, 0.0, params) == pytest.approx(2647.62)


def test_resistance_examples(params):
    assert resistance_force(20.0, 0.0, params) == pytest.approx(4151.46)
    assert resistance_force(20.0, DEG(-3), params) == pytest.approx(
        -11248.360078742313)


@given(v=st.floats(0.0, 35.0), v2=st.floats(0.0, 35.0))
def test_resistance_monotone_in_velocity(v, v2):
    from ecodrive import default_parameters
    p = default_parameters()
    lo, hi = sorted((v, v2))
    assert resistance_force(lo, 0.0, p) <= resistance_force(hi, 0.0, p)


def test_cruising_and_downhill_hold_velocity_exactly(params):
    f_c, _ = mode_dynamics(ModePoint(DrivingMode.CRUISING, 12), 20.0, 0.0, params)
    f_d, _ = mode_dynamics(ModePoint(DrivingMode.DOWNHILL, 11), 20.0, DEG(-3), params)
    assert f_c == 0.0
    assert f_d == 0.0


def test_zero_fuel_modes_burn_exactly_nothing(params):
    for mode in ZERO_FUEL_MODES:
        for gear in (3, 8, 12):
            for v, slope in ((6.0, 0.0), (20.0, DEG(-2)), (15.0, DEG(1))):
                _, op = mode_dynamics(ModePoint(mode, gear), v, slope, params)
                assert op.fuel_rate == 0.0


def test_eco_roll_rollout_example(params):
    f, op = mode_dynamics(ModePoint(DrivingMode.ECO_ROLL, 0), 20.0, 0.0, params)
    assert f == pytest.approx(-0.0068401668824839505, rel=1e-12)
    assert op.fuel_rate == 0.27          # idle burn while rolling
    assert op.engine_speed == params.idle_speed
    assert op.engine_torque == params.idle_torque
    assert op.brake_torque == 0.0


def test_eco_roll_drifts_against_the_resistance(params):
    # sign(dv/ds) must oppose sign(F_r); zero resistance keeps zero drift
    for v, slope in ((10.0, 0.0), (25.0, DEG(2)), (18.0, DEG(-3)), (6.0, DEG(-1))):
        fr = resistance_force(v, slope, params)
        f, _ = mode_dynamics(ModePoint(DrivingMode.ECO_ROLL, 0), v, slope, params)
        if fr == 0.0:
            assert f == 0.0
        else:
            assert np.sign(f) == -np.sign(fr)


def test_coasting_drags_harder_than_eco_roll_when_resistance_holds(params):
    # in gear the engine friction comes on top of the road resistance
    q_c = ModePoint(DrivingMode.COASTING, 10)
    q_e = ModePoint(DrivingMode.ECO_ROLL, 0)
    for v in (10.0, 15.0, 22.0):
        for slope in (0.0, DEG(0.5), DEG(2)):
            if resistance_force(v, slope, params) < 0.0:
                continue
            f_c, _ = mode_dynamics(q_c, v, slope, params)
            f_e, _ = mode_dynamics(q_e, v, slope, params)
            assert f_c < f_e


def test_full_throttle_acceleration_decreases_with_grade(params):
    q = ModePoint(DrivingMode.MAX_ACCELERATION, 9)
    slopes = [DEG(a) for a in (-3, -1, 0, 1, 3)]
    accels = [mode_dynamics(q, 15.0, s, params)[0] for s in slopes]
    assert all(b < a for a, b in zip(accels, accels[1:]))


def test_cruise_operating_point_example(params):
    f, op = mode_dynamics(ModePoint(DrivingMode.CRUISING, 12), 20.0, 0.0, params)
    assert op.engine_speed == pytest.approx(1043.2412428279727)
    assert op.engine_torque == pytest.approx(891.8280218870203)
    assert op.fuel_rate == pytest.approx(5.1826041448449915)
    assert op.brake_torque == 0.0


def test_downhill_retarder_example(params):
    # -3% grade at 20 m/s: 11th gear can hold it, 12th cannot
    f, op = mode_dynamics(ModePoint(DrivingMode.DOWNHILL, 11), 20.0, DEG(-3), params)
    assert op.brake_torque == pytest.approx(1467.8315286486165)
    assert feasible(ModePoint(DrivingMode.DOWNHILL, 11), 20.0, DEG(-3), params).ok
    verdict = feasible(ModePoint(DrivingMode.DOWNHILL, 12), 20.0, DEG(-3), params)
    assert not verdict
    assert verdict.reason == "required brake torque above retarder ceiling"


def test_downhill_needs_a_falling_grade(params):
    verdict = feasible(ModePoint(DrivingMode.DOWNHILL, 11), 20.0, 0.0, params)
    assert not verdict.ok
    assert "resistance" in verdict.reason


def test_engine_braking_infeasible_where_retarder_has_no_torque(params):
    # 11.5 m/s in 12th sits inside the rpm window but below the rpm where
    # the retarder map turns positive
    verdict = feasible(ModePoint(DrivingMode.ENGINE_BRAKING, 12), 11.5, 0.0, params)
    assert not verdict.ok
    assert verdict.reason == "retarder ceiling not positive at this speed"


def test_engine_speed_window_verdicts(params):
    assert feasible(ModePoint(DrivingMode.COASTING, 1), 20.0, 0.0,
                    params).reason == "engine speed above maximum"
    assert feasible(ModePoint(DrivingMode.COASTING, 12), 2.5, 0.0,
                    params).reason == "engine speed below minimum"


def test_at_most_one_torque_nonzero(params):
    for mode in DrivingMode:
        gear = 0 if mode is DrivingMode.ECO_ROLL else 10
        _, op = mode_dynamics(ModePoint(mode, gear), 18.0, DEG(-1), params)
        assert op.engine_torque == 0.0 or op.brake_torque == 0.0


def test_velocity_guard_rejected(params):
    with pytest.raises(ValueError):
        mode_dynamics(ModePoint(DrivingMode.CRUISING, 12), VELOCITY_GUARD, 0.0, params)
    with pytest.raises(ValueError):
        resistance_force(-0.1, 0.0, params)
