"""Truck parameter sets: immutable container, YAML loader and validation.

The shipped default describes a 40 t class tractor at 30 t test mass with a
12-speed gearbox. Parameter files are strict: unknown keys, missing keys or
an unsupported schema_version are rejected, and physical invariants are
checked before a set is handed to the solver.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import _kernels
from ._kernels import KernelParams

SCHEMA_VERSION = 1

_TUPLE_LENGTHS = {
    "gear_ratios": 12,
    "max_torque_coeffs": 3,
    "brake_torque_coeffs": 3,
    "friction_coeffs": 3,
    "fuel_map_coeffs": 6,
}


class ParameterError(ValueError):
    """A parameter file failed validation; `key` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class TruckParameters:
    """Complete physical description of one truck.

    Scalars are SI unless noted: engine speeds rpm, idle_fuel_rate g/s,
    velocity_min km/h. Gear 12 is the 1:1 top gear; ratios are strictly
    decreasing from gear 1.
    """

    mass_total: float
    rolling_coeff: float
    drag_area: float
    wheel_radius: float
    rear_axle_ratio: float
    gear_ratios: tuple[float, ...]
    driveline_inertia_base: float
    driveline_inertia_gain: float
    gravity: float
    air_density: float
    efficiency: float
    idle_speed: float
    idle_torque: float
    idle_fuel_rate: float
    max_torque_coeffs: tuple[float, float, float]
    brake_torque_coeffs: tuple[float, float, float]
    friction_coeffs: tuple[float, float, float]
    fuel_map_coeffs: tuple[float, ...]
    engine_speed_min: float
    engine_speed_max: float
    velocity_min: float
    accel_max: float
    accel_min: float

    def gear_ratio(self, gear: int) -> float:
        """Gearbox ratio i_t for gear 1..12; gear 0 (neutral) has no ratio."""
        if not 1 <= gear <= len(self.gear_ratios):
            raise ValueError(f"gear out of range: {gear}")
        return self.gear_ratios[gear - 1]

    def driveline_inertia(self, gear: int) -> float:
        """Lumped rotating inertia J_pt in kg*m^2; base value in neutral."""
        if gear == 0:
            return self.driveline_inertia_base
        return self.driveline_inertia_base + self.driveline_inertia_gain * self.gear_ratio(gear) ** 2

    def effective_mass(self, gear: int) -> float:
        """Translational-equivalent mass m + J_pt / r_w^2 in kg."""
        return self.mass_total + self.driveline_inertia(gear) / self.wheel_radius**2

    @functools.cached_property
    def kernel(self) -> KernelParams:
        """Flat numeric view consumed by the compiled core."""
        ratios = np.zeros(len(self.gear_ratios) + 1)
        ratios[1:] = self.gear_ratios
        omega_per_v = 30.0 * self.rear_axle_ratio * ratios / (math.pi * self.wheel_radius)
        drive_ratio = self.rear_axle_ratio * ratios / self.wheel_radius
        inertia = self.driveline_inertia_base + self.driveline_inertia_gain * ratios**2
        eff_mass = self.mass_total + inertia / self.wheel_radius**2
        return KernelParams(
            mass=self.mass_total,
            gravity=self.gravity,
            rolling_coeff=self.rolling_coeff,
            air_density=self.air_density,
            drag_area=self.drag_area,
            efficiency=self.efficiency,
            omega_per_v=omega_per_v,
            drive_ratio=drive_ratio,
            eff_mass=eff_mass,
            omega_min=self.engine_speed_min,
            omega_max=self.engine_speed_max,
            idle_speed=self.idle_speed,
            idle_torque=self.idle_torque,
            idle_fuel_gps=self.idle_fuel_rate,
            te=np.asarray(self.max_torque_coeffs, dtype=float),
            tb=np.asarray(self.brake_torque_coeffs, dtype=float),
            afr=np.asarray(self.friction_coeffs, dtype=float),
            beta=np.asarray(self.fuel_map_coeffs, dtype=float),
            accel_max=self.accel_max,
            accel_min=self.accel_min,
        )


def _validate(p: TruckParameters) -> None:
    positive = [
        "mass_total", "rolling_coeff", "drag_area", "wheel_radius",
        "rear_axle_ratio", "gravity", "air_density", "efficiency",
        "idle_speed", "engine_speed_min", "engine_speed_max", "velocity_min",
    ]
    for key in positive:
        if getattr(p, key) <= 0.0:
            raise ParameterError(key, "must be strictly positive")
    for key in ("driveline_inertia_base", "driveline_inertia_gain",
                "idle_torque", "idle_fuel_rate"):
        if getattr(p, key) < 0.0:
            raise ParameterError(key, "must be nonnegative")
    if any(r <= 0.0 for r in p.gear_ratios):
        raise ParameterError("gear_ratios", "every ratio must be strictly positive")
    if any(a <= b for a, b in zip(p.gear_ratios, p.gear_ratios[1:])):
        raise ParameterError("gear_ratios", "ratios must be strictly decreasing")
    if p.engine_speed_min >= p.engine_speed_max:
        raise ParameterError("engine_speed_min", "must be below engine_speed_max")
    if not (p.accel_min < 0.0 < p.accel_max):
        raise ParameterError("accel_max", "need accel_min < 0 < accel_max")

    k = p.kernel
    if _kernels.fuel_rate_raw(p.idle_speed, p.idle_torque, k) < 0.0:
        raise ParameterError("fuel_map_coeffs", "fuel map is negative at the idle point")
    omegas = np.linspace(p.engine_speed_min, p.engine_speed_max, 201)
    for omega in omegas:
        t_max = _kernels.max_engine_torque(omega, k)
        if t_max <= 0.0:
            continue
        for torque in np.linspace(0.0, t_max, 33):
            if _kernels.fuel_rate_raw(omega, torque, k) < 0.0:
                raise ParameterError(
                    "fuel_map_coeffs",
                    f"fuel map is negative at ({omega:.0f} rpm, {torque:.0f} Nm)")


def _coerce(key: str, value) -> float | tuple[float, ...]:
    if key in _TUPLE_LENGTHS:
        if not isinstance(value, (list, tuple)):
            raise ParameterError(key, "must be a list of numbers")
        if len(value) != _TUPLE_LENGTHS[key]:
            raise ParameterError(key, f"must have exactly {_TUPLE_LENGTHS[key]} entries")
        try:
            return tuple(float(x) for x in value)
        except (TypeError, ValueError):
            raise ParameterError(key, "entries must be numbers") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParameterError(key, "must be a number")
    return float(value)


def parameters_from_dict(doc: dict) -> TruckParameters:
    """Build and validate a parameter set from a plain mapping."""
    if not isinstance(doc, dict):
        raise ParameterError("<root>", "document must be a mapping")
    doc = dict(doc)
    version = doc.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ParameterError("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    field_names = [f.name for f in fields(TruckParameters)]
    unknown = sorted(set(doc) - set(field_names))
    if unknown:
        raise ParameterError(unknown[0], "unknown key")
    missing = sorted(set(field_names) - set(doc))
    if missing:
        raise ParameterError(missing[0], "missing key")
    params = TruckParameters(**{k: _coerce(k, v) for k, v in doc.items()})
    _validate(params)
    return params


def load_parameters(path: str | Path) -> TruckParameters:
    """Load a parameter YAML file, validating schema and physical invariants."""
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return parameters_from_dict(doc)


@functools.lru_cache(maxsize=1)
def default_parameters() -> TruckParameters:
    """The packaged default truck (30 t test mass, 12-speed)."""
    ref = resources.files("ecodrive").joinpath("data/truck_params.yaml")
    with resources.as_file(ref) as path:
        return load_parameters(path)
