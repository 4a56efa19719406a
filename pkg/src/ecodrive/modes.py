"""Driving-mode catalog: the discrete choices the optimizer picks from.

A choice is a (mode, gear) pairing. Five modes run in-gear over the 12
gearbox ratios and eco-roll runs only in neutral, so the full universe has
61 entries. `enumerate_candidates` narrows the universe to what is
admissible at one sample, including the anti-chatter eco-roll suppression.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import _kernels, dynamics
from .params import TruckParameters


class DrivingMode(IntEnum):
    CRUISING = _kernels.CRUISING
    ECO_ROLL = _kernels.ECO_ROLL
    COASTING = _kernels.COASTING
    ENGINE_BRAKING = _kernels.ENGINE_BRAKING
    DOWNHILL = _kernels.DOWNHILL
    MAX_ACCELERATION = _kernels.MAX_ACCELERATION

    @property
    def label(self) -> str:
        return self.name.lower()


# Modes that burn no fuel at all while engaged.
ZERO_FUEL_MODES = frozenset(
    {DrivingMode.COASTING, DrivingMode.ENGINE_BRAKING, DrivingMode.DOWNHILL})


@dataclass(frozen=True)
class ModePoint:
    """One (mode, gear) choice. Gear 0 (neutral) pairs only with eco-roll;
    every other mode needs a gear in 1..12."""

    mode: DrivingMode
    gear: int

    def __post_init__(self):
        if self.mode == DrivingMode.ECO_ROLL:
            if self.gear != 0:
                raise ValueError("eco-roll requires neutral (gear 0)")
        elif not 1 <= self.gear <= _kernels.NUM_GEARS:
            raise ValueError(f"gear out of range for {self.mode.label}: {self.gear}")

    @property
    def label(self) -> str:
        return f"{self.mode.label}/g{self.gear}"


@dataclass(frozen=True)
class SampleContext:
    """Local situation at one decision sample."""

    velocity: float                           # m/s
    slope: float                              # rad
    speed_limit: float                        # m/s
    previously_selected: ModePoint | None = None


def candidate_universe() -> tuple[ModePoint, ...]:
    """All 61 structurally valid choices, mode order then ascending gear."""
    return tuple(
        ModePoint(DrivingMode(int(m)), int(g))
        for m, g in zip(_kernels.CANDIDATE_MODES, _kernels.CANDIDATE_GEARS))


_UNIVERSE = None


def _universe() -> tuple[ModePoint, ...]:
    global _UNIVERSE
    if _UNIVERSE is None:
        _UNIVERSE = candidate_universe()
    return _UNIVERSE


def suppress_eco_roll(ctx: SampleContext, params: TruckParameters) -> bool:
    """True when eco-roll should be dropped at this sample to avoid chatter.

    All three must hold: gravity/resistance would push the truck the way
    eco-roll drifts (opposite, nonzero signs), the velocity sits within
    1.5 km/h of the limit, and the adjacent already-decided sample chose
    some other mode.
    """
    prev = ctx.previously_selected
    if prev is None or prev.mode == DrivingMode.ECO_ROLL:
        return False
    if (ctx.speed_limit - ctx.velocity) >= _kernels.ECO_ROLL_SUPPRESS_GAP:
        return False
    k = params.kernel
    fr = _kernels.resistance_force(ctx.velocity, ctx.slope, k)
    f_eco = _kernels.mode_eval(
        _kernels.ECO_ROLL, 0, ctx.velocity, ctx.slope, k)[0]
    return bool(np.sign(fr) * np.sign(f_eco) < 0.0)


def enumerate_candidates(
    ctx: SampleContext,
    params: TruckParameters,
    apply_suppression: bool = True,
    max_gear_step: int = 0,
) -> list[ModePoint]:
    """Admissible choices at `ctx`, in universe order.

    `max_gear_step` > 0 additionally limits the gear jump relative to the
    previously selected choice (geared modes only; neutral is exempt).
    """
    if ctx.velocity <= dynamics.VELOCITY_GUARD:
        raise ValueError(f"velocity below guard: {ctx.velocity}")
    out = []
    prev = ctx.previously_selected
    drop_eco = apply_suppression and suppress_eco_roll(ctx, params)
    k = params.kernel
    for q in _universe():
        if _kernels.feasible_code(int(q.mode), q.gear, ctx.velocity, ctx.slope, k) != 0:
            continue
        if q.mode == DrivingMode.ECO_ROLL and drop_eco:
            continue
        if (max_gear_step > 0 and prev is not None
                and q.gear >= 1 and prev.gear >= 1
                and abs(q.gear - prev.gear) > max_gear_step):
            continue
        out.append(q)
    return out
