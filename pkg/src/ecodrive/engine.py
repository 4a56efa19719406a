"""Quasi-static engine maps.

Engine speed couples kinematically to vehicle speed through the driveline:
    omega = 30 * i_r * i_t(gear) * v / (pi * r_w)   [rpm]
In neutral the engine idles. Torque limits and the friction torque are
quadratics in omega; the retarder limit is t_b0/omega + t_b1 + t_b2*omega;
fuel flow is a bivariate second-order map in (omega, torque), clamped at zero.
"""

from __future__ import annotations

from . import _kernels
from .params import TruckParameters


def engine_speed(velocity: float, gear: int, params: TruckParameters) -> float:
    """Engine speed in rpm at vehicle speed `velocity` (m/s) in `gear`.

    Gear 0 is neutral: the engine turns at idle regardless of speed.
    """
    if velocity < 0.0:
        raise ValueError(f"velocity must be nonnegative, got {velocity}")
    if not 0 <= gear <= _kernels.NUM_GEARS:
        raise ValueError(f"gear out of range: {gear}")
    return _kernels.engine_speed(velocity, gear, params.kernel)


def fuel_rate(engine_rpm: float, torque: float, params: TruckParameters) -> float:
    """Fuel mass flow in g/s at one operating point, clamped at zero."""
    return _kernels.fuel_rate_gps(engine_rpm, torque, params.kernel)


def max_engine_torque(engine_rpm: float, params: TruckParameters) -> float:
    """Full-load torque limit T_e,m(omega) in Nm."""
    return _kernels.max_engine_torque(engine_rpm, params.kernel)


def friction_torque(engine_rpm: float, params: TruckParameters) -> float:
    """Internal friction torque T_fr(omega) in Nm (drags when unfueled)."""
    return _kernels.friction_torque(engine_rpm, params.kernel)


def max_brake_torque(engine_rpm: float, params: TruckParameters) -> float:
    """Retarder torque ceiling T_eb,m(omega) in Nm.

    Undefined at omega <= 0 (the map has a 1/omega term); negative values at
    low rpm mean the retarder cannot brake there at all.
    """
    if engine_rpm <= 0.0:
        raise ValueError(f"engine speed must be positive, got {engine_rpm}")
    return _kernels.max_brake_torque(engine_rpm, params.kernel)
