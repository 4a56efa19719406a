"""Route-level planning on top of the per-segment solver.

`plan_trip` segments the route, solves the segments in order, and folds the
results into an immutable `TripPlan` with fuel and time totals. A failed
segment becomes a `no-advice` gap: the plan keeps its boundary velocities,
excludes it from the totals and is flagged incomplete. `recompute_from`
implements the override loop: the overridden segment keeps its advised
profile but changes status, and the following segment is re-solved from the
velocity the driver actually carried across the joint.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .costs import CostWeights
from .dynamics import feasible, mode_dynamics
from .modes import DrivingMode, ModePoint
from .params import TruckParameters
from .route import (RoutePoint, RouteSegment, SegmentationConfig, clamp_entry,
                    segment_route)
from .solver import Convergence, SegmentSolution, SolverConfig, shoot
from .units import kmh_to_ms, ms_to_kmh


class SegmentStatus(str, Enum):
    ADVISED = "advised"
    OVERRIDDEN = "overridden"
    NO_ADVICE = "no-advice"
    PENDING = "pending"


@dataclass(frozen=True)
class PlannedSegment:
    """One route segment with its solve outcome. `solution` is None for a
    no-advice gap; `brake_warning` marks boundaries that look unreachable
    even at maximum engine braking (the plan itself never schedules the
    service brakes). `wall_time` is the solve time in seconds; it never
    enters exported artifacts."""

    segment: RouteSegment
    solution: SegmentSolution | None
    status: SegmentStatus
    brake_warning: bool = False
    note: str | None = None
    wall_time: float = 0.0


@dataclass(frozen=True)
class TripPlan:
    """Immutable snapshot of a planned trip.

    Totals cover advised and overridden segments only; `incomplete` is set
    when any segment ended up without advice. The weights, solver config
    and truck parameters ride along so an override can re-solve downstream
    segments under identical settings.
    """

    segments: tuple[PlannedSegment, ...]
    initial_velocity: float
    total_fuel: float
    total_duration: float
    incomplete: bool
    weights: CostWeights
    config: SolverConfig
    params: TruckParameters

    @property
    def route_length(self) -> float:
        if not self.segments:
            return 0.0
        return self.segments[-1].segment.end_position


def _brake_warning(segment: RouteSegment, config: SolverConfig,
                   params: TruckParameters) -> bool:
    """First-order screen for joints that would need the service brakes.

    Compares the mean deceleration the boundary pair demands against the
    strongest zero-throttle deceleration available along the segment
    (engine braking in any admissible gear, else coasting). A warning is
    advisory: the solver may still fail or succeed on the full dynamics.
    """
    v0, vf = segment.entry_velocity, segment.exit_velocity
    if vf >= v0 or segment.length <= 0.0:
        return False
    required = (vf * vf - v0 * v0) / (2.0 * segment.length)  # mean dv²/2ds
    candidates = [ModePoint(DrivingMode.ENGINE_BRAKING, g) for g in range(1, 13)]
    candidates.append(ModePoint(DrivingMode.COASTING, 12))
    positions = np.linspace(segment.start_position, segment.end_position, 9)
    speeds = np.linspace(v0, vf, 9)
    strongest = []
    for s, v in zip(positions, speeds):
        slope = segment.profile.at(float(s))
        best = None
        for q in candidates:
            if not feasible(q, float(v), slope, params):
                continue
            f, _ = mode_dynamics(q, float(v), slope, params)
            a = f * float(v)  # dv/ds * v = dv²/2ds
            if best is None or a < best:
                best = a
        if best is not None:
            strongest.append(best)
    if not strongest:
        return True
    return float(np.mean(strongest)) > required


def _solve_planned(segment: RouteSegment, weights: CostWeights,
                   config: SolverConfig, params: TruckParameters,
                   ) -> PlannedSegment:
    started = time.perf_counter()
    warning = _brake_warning(segment, config, params)
    sol = shoot(segment, weights, config, params)
    elapsed = time.perf_counter() - started
    if sol.converged is Convergence.FAILED:
        return PlannedSegment(segment, None, SegmentStatus.NO_ADVICE,
                              brake_warning=warning,
                              note=sol.failure_reason,
                              wall_time=elapsed)
    return PlannedSegment(segment, sol, SegmentStatus.ADVISED,
                          brake_warning=warning, wall_time=elapsed)


def _finalize(segments: tuple[PlannedSegment, ...], initial_velocity: float,
              weights: CostWeights, config: SolverConfig,
              params: TruckParameters) -> TripPlan:
    fuel = sum(ps.solution.fuel_used for ps in segments
               if ps.solution is not None)
    duration = sum(ps.solution.duration for ps in segments
                   if ps.solution is not None)
    incomplete = any(ps.solution is None for ps in segments)
    return TripPlan(segments=segments, initial_velocity=initial_velocity,
                    total_fuel=fuel, total_duration=duration,
                    incomplete=incomplete, weights=weights, config=config,
                    params=params)


def plan_trip(
    route_points: list[RoutePoint],
    initial_velocity: float,
    weights: CostWeights,
    config: SolverConfig,
    params: TruckParameters,
    segmentation: SegmentationConfig | None = None,
    parallel: bool = False,
) -> TripPlan:
    """Plan a full route starting at `initial_velocity` (m/s).

    Segments are solved in route order. Each solve targets the boundary
    velocities the segmentation assigned, and since a converged solution
    meets its exit boundary exactly, the next segment's entry target is
    already consistent; a no-advice gap simply leaves the following segment
    starting from the shared boundary target. With `parallel=True` the
    per-segment solves (whose boundary targets never depend on upstream
    outcomes) run speculatively in a thread pool; results are identical to
    the sequential order.
    """
    segments = segment_route(route_points, initial_velocity, segmentation)
    floor = kmh_to_ms(config.velocity_floor)
    first_limit = segments[0].speed_limit
    if not floor - 1e-9 <= initial_velocity <= first_limit + 1e-9:
        raise ValueError(
            f"initial velocity {ms_to_kmh(initial_velocity):.1f} km/h outside "
            f"[{ms_to_kmh(floor):.1f}, {ms_to_kmh(first_limit):.1f}] km/h")

    if parallel:
        with ThreadPoolExecutor() as pool:
            planned = tuple(pool.map(
                lambda seg: _solve_planned(seg, weights, config, params),
                segments))
    else:
        planned = tuple(_solve_planned(seg, weights, config, params)
                        for seg in segments)
    return _finalize(planned, initial_velocity, weights, config, params)


def recompute_from(plan: TripPlan, segment_index: int,
                   actual_velocity: float) -> TripPlan:
    """New plan after the driver exits `segment_index` at `actual_velocity`.

    The overridden segment keeps its profile but is marked overridden; the
    next segment is re-solved entering at the actual velocity. Segments
    beyond that one kept their boundary targets (a converged re-solve still
    exits on target), so their already-solved records are reused unchanged;
    segments before the override are carried over untouched.
    """
    if not 0 <= segment_index < len(plan.segments):
        raise IndexError(f"segment index {segment_index} out of range")
    seg = plan.segments[segment_index].segment
    floor = kmh_to_ms(plan.config.velocity_floor)
    if not floor - 1e-9 <= actual_velocity <= seg.speed_limit + 1e-9:
        raise ValueError(
            f"override velocity {ms_to_kmh(actual_velocity):.1f} km/h outside "
            f"[{ms_to_kmh(floor):.1f}, {ms_to_kmh(seg.speed_limit):.1f}] km/h")

    out = list(plan.segments)
    out[segment_index] = replace(out[segment_index],
                                 status=SegmentStatus.OVERRIDDEN)
    if segment_index + 1 < len(out):
        # The next segment may carry a lower speed limit; the driver has to
        # brake to it at the boundary anyway, so clamp into its band.
        nxt = clamp_entry(out[segment_index + 1].segment,
                          float(actual_velocity), floor)
        out[segment_index + 1] = _solve_planned(
            nxt, plan.weights, plan.config, plan.params)
    return _finalize(tuple(out), plan.initial_velocity, plan.weights,
                     plan.config, plan.params)


# ---------------------------------------------------------------------------
# Export

_EXPORT_COLUMNS = ["segment", "position_m", "velocity_kmh", "gear", "mode",
                   "engine_speed_rpm", "engine_torque_nm", "brake_torque_nm",
                   "fuel_rate_gps"]


def export_plan_csv(plan: TripPlan) -> str:
    """Step table for the whole plan with a totals footer.

    No-advice segments contribute no rows (their indices simply do not
    appear). Deterministic: identical plans serialize byte-identically.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_EXPORT_COLUMNS)
    for ps in plan.segments:
        if ps.solution is None:
            continue
        for rec in ps.solution.steps:
            writer.writerow([
                ps.segment.index,
                f"{rec.position:.3f}",
                f"{ms_to_kmh(rec.velocity):.3f}",
                rec.choice.gear,
                rec.choice.mode.label,
                f"{rec.op_point.engine_speed:.2f}",
                f"{rec.op_point.engine_torque:.2f}",
                f"{rec.op_point.brake_torque:.2f}",
                f"{rec.op_point.fuel_rate:.4f}",
            ])
    buf.write(f"# total_fuel_kg,{plan.total_fuel:.6f}\n")
    buf.write(f"# total_duration_s,{plan.total_duration:.3f}\n")
    buf.write(f"# incomplete,{'true' if plan.incomplete else 'false'}\n")
    return buf.getvalue()


def _steps_to_dicts(solution: SegmentSolution) -> list[dict]:
    return [
        {
            "position_m": rec.position,
            "velocity_kmh": ms_to_kmh(rec.velocity),
            "gear": rec.choice.gear,
            "mode": rec.choice.mode.label,
            "engine_speed_rpm": rec.op_point.engine_speed,
            "engine_torque_nm": rec.op_point.engine_torque,
            "brake_torque_nm": rec.op_point.brake_torque,
            "fuel_rate_gps": rec.op_point.fuel_rate,
        }
        for rec in solution.steps
    ]


def plan_to_dict(plan: TripPlan) -> dict:
    """Structured mirror of the plan (km/h, m, kg at this boundary)."""
    segments = []
    for ps in plan.segments:
        seg = ps.segment
        entry = {
            "index": seg.index,
            "start_position_m": seg.start_position,
            "end_position_m": seg.end_position,
            "speed_limit_kmh": ms_to_kmh(seg.speed_limit),
            "entry_velocity_kmh": ms_to_kmh(seg.entry_velocity),
            "exit_velocity_kmh": ms_to_kmh(seg.exit_velocity),
            "slope_class": seg.slope_class.value,
            "terminating_event": (seg.terminating_event.value
                                  if seg.terminating_event else None),
            "status": ps.status.value,
            "brake_warning": ps.brake_warning,
        }
        if ps.solution is not None:
            sol = ps.solution
            entry.update({
                "convergence": sol.converged.value,
                "fuel_kg": sol.fuel_used,
                "duration_s": sol.duration,
                "discrete_cost": sol.discrete_cost,
                "terminal_costate": sol.terminal_costate,
                "steps": _steps_to_dicts(sol),
            })
        else:
            entry.update({"convergence": Convergence.FAILED.value,
                          "note": ps.note, "steps": []})
        segments.append(entry)
    return {
        "initial_velocity_kmh": ms_to_kmh(plan.initial_velocity),
        "total_fuel_kg": plan.total_fuel,
        "total_duration_s": plan.total_duration,
        "incomplete": plan.incomplete,
        "route_length_m": plan.route_length,
        "segments": segments,
    }


def advice_at(plan: TripPlan, position: float) -> dict:
    """Advice for the sample governing `position`: current mode/gear, the
    velocity to hold, and the distance to the next segment boundary (the
    next static event or slope cut)."""
    if not plan.segments:
        raise ValueError("empty plan")
    start = plan.segments[0].segment.start_position
    end = plan.segments[-1].segment.end_position
    if not start <= position <= end:
        raise ValueError(f"position {position} m outside route [{start}, {end}] m")
    ps = plan.segments[-1]
    for cand in plan.segments:
        if cand.segment.start_position <= position < cand.segment.end_position:
            ps = cand
            break
    seg = ps.segment
    base = {
        "segment_index": seg.index,
        "status": ps.status.value,
        "distance_to_boundary_m": seg.end_position - position,
        "next_event": (seg.terminating_event.value
                       if seg.terminating_event else None),
        "exit_velocity_kmh": ms_to_kmh(seg.exit_velocity),
    }
    if ps.solution is None:
        return {**base, "advice": None}
    rec = ps.solution.steps[0]
    for step in ps.solution.steps:
        if step.position <= position:
            rec = step
        else:
            break
    return {
        **base,
        "advice": {
            "mode": rec.choice.mode.label,
            "gear": rec.choice.gear,
            "target_velocity_kmh": ms_to_kmh(rec.velocity),
            "position_m": rec.position,
        },
    }
