"""Cost structure of the velocity-planning problem.

Minimizing fuel and time over a fixed distance turns into the per-meter
running cost g = (W1 * mf + W2) / v (mf in kg/s) and, for the costate-based
solver, the Hamiltonian H = g + lambda * dv/ds. `costate_derivative` is the
analytic dH/dv used by the backward costate update.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .modes import ModePoint
from .params import TruckParameters


@dataclass(frozen=True)
class CostWeights:
    """Objective weights: `fuel_weight` (W1) prices burned fuel per kg,
    `time_weight` (W2) prices travel time per second. Their ratio sets the
    fuel rate above which going faster stops paying off."""

    fuel_weight: float = 1000.0
    time_weight: float = 8.0

    def __post_init__(self):
        if self.fuel_weight < 0.0 or self.time_weight < 0.0:
            raise ValueError("cost weights must be nonnegative")
        if self.fuel_weight == 0.0 and self.time_weight == 0.0:
            raise ValueError("at least one cost weight must be positive")


def running_cost(
    q: ModePoint, velocity: float, slope: float,
    weights: CostWeights, params: TruckParameters,
) -> float:
    """Per-meter cost of traversing at `velocity` under choice `q`."""
    _require_above_guard(velocity)
    return _kernels.running_cost(
        int(q.mode), q.gear, velocity, slope,
        weights.fuel_weight, weights.time_weight, params.kernel)


def hamiltonian(
    q: ModePoint, velocity: float, costate: float, slope: float,
    weights: CostWeights, params: TruckParameters,
) -> float:
    """H = running_cost + costate * dv/ds for choice `q`."""
    _require_above_guard(velocity)
    return _kernels.hamiltonian(
        int(q.mode), q.gear, velocity, costate, slope,
        weights.fuel_weight, weights.time_weight, params.kernel)


def costate_derivative(
    q: ModePoint, velocity: float, costate: float, slope: float,
    weights: CostWeights, params: TruckParameters,
) -> float:
    """Analytic dH/dv at one sample: the slope the backward costate update
    integrates. Matches central finite differences of `hamiltonian` away
    from the fuel-map clamp boundary."""
    _require_above_guard(velocity)
    return _kernels.hamiltonian_v_gradient(
        int(q.mode), q.gear, velocity, costate, slope,
        weights.fuel_weight, weights.time_weight, params.kernel)


def _require_above_guard(velocity: float) -> None:
    if velocity <= _kernels.VELOCITY_GUARD:
        raise ValueError(
            f"velocity {velocity} m/s at or below the "
            f"{_kernels.VELOCITY_GUARD} m/s guard")
