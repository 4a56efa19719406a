"""Longitudinal vehicle model in the space domain.

State is velocity over position; for effective mass M(gear) = m + J_pt/r_w^2
and drive ratio D(gear) = i_r * i_t / r_w the velocity derivative is

    dv/ds = (D * (eta * (T_e - T_fr) - T_eb) - F_r) / (M * v)

with the resistance F_r = m*g*(C_r*cos(slope) + sin(slope)) + rho*CdA/2 * v^2.
Each driving mode fixes the torque split:

    cruising          T_e holds v exactly (dv/ds = 0), fueled
    eco_roll          neutral, engine idling, pure roll-out
    coasting          in gear, unfueled, engine friction drags
    engine_braking    retarder at its torque ceiling, unfueled
    downhill          retarder holds v exactly on falling grades, unfueled
    max_acceleration  full-load torque curve, fueled

The 1/v factor makes the model singular at standstill; inputs at or below
VELOCITY_GUARD (0.1 m/s) are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from . import _kernels
from .params import TruckParameters

if TYPE_CHECKING:
    from .modes import ModePoint

VELOCITY_GUARD = _kernels.VELOCITY_GUARD

_REASONS = {
    _kernels.ENGINE_SPEED_LOW: "engine speed below minimum",
    _kernels.ENGINE_SPEED_HIGH: "engine speed above maximum",
    _kernels.CRUISE_TORQUE_NONPOSITIVE: "cruise torque not positive",
    _kernels.CRUISE_TORQUE_EXCEEDED: "cruise torque above full-load curve",
    _kernels.DOWNHILL_RESISTANCE_NOT_NEGATIVE: "resistance not negative (no falling grade)",
    _kernels.DOWNHILL_BRAKE_NONPOSITIVE: "required brake torque not positive",
    _kernels.DOWNHILL_BRAKE_EXCEEDED: "required brake torque above retarder ceiling",
    _kernels.ACCEL_ABOVE_MAX: "acceleration above limit",
    _kernels.ACCEL_BELOW_MIN: "deceleration below limit",
    _kernels.RETARDER_TORQUE_NONPOSITIVE: "retarder ceiling not positive at this speed",
    _kernels.BELOW_VELOCITY_GUARD: "velocity at or below the singularity guard",
}


@dataclass(frozen=True)
class EngineOperatingPoint:
    """Engine state implied by one choice: rpm, drive and brake torque (Nm),
    fuel flow (g/s). At most one of the torques is nonzero."""

    engine_speed: float
    engine_torque: float
    brake_torque: float
    fuel_rate: float


@dataclass(frozen=True)
class Verdict:
    """Admissibility answer; falsy when rejected, `reason` names the first
    violated check."""

    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def resistance_force(velocity: float, slope: float, params: TruckParameters) -> float:
    """Total driving resistance in N; negative when grade pull dominates."""
    if velocity < 0.0:
        raise ValueError(f"velocity must be nonnegative, got {velocity}")
    return _kernels.resistance_force(velocity, slope, params.kernel)


def mode_dynamics(
    q: "ModePoint", velocity: float, slope: float, params: TruckParameters,
) -> tuple[float, EngineOperatingPoint]:
    """Velocity derivative dv/ds and engine operating point for choice `q`.

    Evaluates the model unconditionally (no admissibility checks); the
    operating point may violate torque or speed limits, which `feasible`
    reports separately. Raises ValueError at or below the 0.1 m/s guard.
    """
    if velocity <= VELOCITY_GUARD:
        raise ValueError(
            f"velocity {velocity} m/s at or below the {VELOCITY_GUARD} m/s guard")
    f, omega, te, teb, mf = _kernels.mode_eval(
        int(q.mode), q.gear, velocity, slope, params.kernel)
    return f, EngineOperatingPoint(omega, te, teb, mf)


def feasible(
    q: "ModePoint", velocity: float, slope: float, params: TruckParameters,
) -> Verdict:
    """Check choice `q` against engine-speed window, torque limits, the
    acceleration band and mode preconditions at (velocity, slope)."""
    code = _kernels.feasible_code(int(q.mode), q.gear, velocity, slope, params.kernel)
    if code == _kernels.FEASIBLE:
        return Verdict(True)
    return Verdict(False, _REASONS[code])
