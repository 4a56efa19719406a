"""Command-line front door.

Validates inputs, solves single segments or whole routes, exports
plot-ready step tables, compares the solver against the dynamic-programming
reference, generates synthetic routes and serves the advisory API.

Exit codes: 0 success, 2 input error, 3 no advice, 4 budget exceeded.
All commands are deterministic given their flags and input files; wall-time
lines go to stdout only and never into `--out` artifacts.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import time
from importlib import resources
from pathlib import Path

import click

from .costs import CostWeights
from .dp import BudgetExceededError, dp_oracle, velocity_grid
from .generate import random_route, rolling_hills_route, valley_route
from .params import ParameterError, TruckParameters, default_parameters, \
    load_parameters
from .planner import export_plan_csv, plan_to_dict, plan_trip
from .route import (RouteError, load_route, segment_route, write_route_csv)
from .solver import Convergence, SolverConfig, shoot
from .units import kmh_to_ms, ms_to_kmh

EXIT_INPUT = 2
EXIT_NO_ADVICE = 3
EXIT_BUDGET = 4

PARAMS_ENV = "ECODRIVE_PARAMS"

_BUNDLED_ROUTES = {
    "valley": "valley.csv",
    "rolling-hills": "rolling_hills.csv",
}

_INPUT_ERRORS = (RouteError, ParameterError, ValueError, OSError, KeyError)


def _fail(message: str, code: int = EXIT_INPUT) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _resolve_route(name_or_path: str) -> list:
    """Load a route file, or one of the bundled routes by name
    (`valley`, `rolling-hills`)."""
    if name_or_path in _BUNDLED_ROUTES and not Path(name_or_path).exists():
        ref = resources.files("ecodrive") / "data" / _BUNDLED_ROUTES[name_or_path]
        with resources.as_file(ref) as path:
            return load_route(path)
    return load_route(name_or_path)


def _resolve_params(path: str | None) -> TruckParameters:
    if path:
        return load_parameters(path)
    env = os.environ.get(PARAMS_ENV)
    if env:
        return load_parameters(env)
    return default_parameters()


def _route_argument(fn):
    return click.argument("route_file", metavar="ROUTE")(fn)


def _solver_options(default_ds: float):
    def deco(fn):
        fn = click.option("--ds", type=float, default=default_ds,
                          show_default=True,
                          help="Sample spacing in metres.")(fn)
        fn = click.option("--w1", type=float,
                          default=CostWeights().fuel_weight,
                          show_default=True,
                          help="Fuel weight (cost per kg).")(fn)
        fn = click.option("--w2", type=float,
                          default=CostWeights().time_weight,
                          show_default=True,
                          help="Time weight (cost per second).")(fn)
        fn = click.option("--params", "params_path", default=None,
                          metavar="FILE",
                          help=f"Truck parameter YAML (default: "
                               f"${PARAMS_ENV} or the bundled set).")(fn)
        return fn
    return deco


def _format_option(fn):
    return click.option("--format", "fmt",
                        type=click.Choice(["table", "json"]),
                        default="table", show_default=True,
                        help="Human table or structured output.")(fn)


def _build(ds: float, w1: float, w2: float, params_path: str | None):
    config = SolverConfig(step_length=ds)
    weights = CostWeights(fuel_weight=w1, time_weight=w2)
    params = _resolve_params(params_path)
    return config, weights, params


_STEP_COLUMNS = ["position_m", "velocity_kmh", "costate", "mode", "gear",
                 "engine_speed_rpm", "engine_torque_nm", "brake_torque_nm",
                 "fuel_rate_gps", "running_cost", "hamiltonian", "forced"]


def _step_table_csv(solution) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_STEP_COLUMNS)
    for rec in solution.steps:
        writer.writerow([
            f"{rec.position:.3f}",
            f"{ms_to_kmh(rec.velocity):.3f}",
            f"{rec.costate:.6g}",
            rec.choice.mode.label,
            rec.choice.gear,
            f"{rec.op_point.engine_speed:.2f}",
            f"{rec.op_point.engine_torque:.2f}",
            f"{rec.op_point.brake_torque:.2f}",
            f"{rec.op_point.fuel_rate:.4f}",
            f"{rec.running_cost:.6g}",
            f"{rec.hamiltonian:.6g}",
            "true" if rec.forced else "false",
        ])
    return buf.getvalue()


@click.group()
@click.version_option(package_name="ecodrive")
def main() -> None:
    """Fuel/time-optimal driving-mode advice for heavy-duty trucks."""


@main.command("solve-segment")
@_route_argument
@click.option("--segment", "segment_index", type=int, required=True,
              help="Zero-based segment index.")
@_solver_options(default_ds=1.0)
@click.option("--out", "out_file", default=None, metavar="FILE",
              help="Write the step table as CSV.")
@_format_option
def solve_segment(route_file, segment_index, ds, w1, w2, params_path,
                  out_file, fmt) -> None:
    """Solve one route segment and report convergence, cost and timing.

    ROUTE is a route file (CSV/JSON) or a bundled route name. Segment 0
    enters at the speed limit in effect at the route start.
    """
    try:
        config, weights, params = _build(ds, w1, w2, params_path)
        points = _resolve_route(route_file)
        v0 = kmh_to_ms(points[0].speed_limit)
        segments = segment_route(points, v0)
        if not 0 <= segment_index < len(segments):
            raise ValueError(f"segment index {segment_index} out of range "
                             f"(route has {len(segments)} segments)")
        seg = segments[segment_index]
    except _INPUT_ERRORS as exc:
        _fail(str(exc))

    started = time.perf_counter()
    solution = shoot(seg, weights, config, params)
    wall = time.perf_counter() - started

    if out_file and solution.converged is not Convergence.FAILED:
        Path(out_file).write_text(_step_table_csv(solution))

    if fmt == "json":
        payload = {
            "segment": seg.index,
            "start_position_m": seg.start_position,
            "end_position_m": seg.end_position,
            "entry_velocity_kmh": ms_to_kmh(seg.entry_velocity),
            "exit_velocity_kmh": ms_to_kmh(seg.exit_velocity),
            "convergence": solution.converged.value,
            "entry_error_kmh": solution.entry_error_kmh,
            "discrete_cost": solution.discrete_cost,
            "fuel_kg": solution.fuel_used,
            "duration_s": solution.duration,
            "iterations": solution.iterations,
            "terminal_costate": solution.terminal_costate,
            "failure_reason": solution.failure_reason,
            "wall_time_s": wall,
        }
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(f"segment {seg.index}: "
                   f"{seg.start_position:.0f}-{seg.end_position:.0f} m, "
                   f"{ms_to_kmh(seg.entry_velocity):.1f} -> "
                   f"{ms_to_kmh(seg.exit_velocity):.1f} km/h, ds={ds:g} m")
        click.echo(f"convergence: {solution.converged.value}"
                   + (f" (entry error {solution.entry_error_kmh:+.3f} km/h)"
                      if solution.converged is not Convergence.FAILED
                      else f" ({solution.failure_reason})"))
        click.echo(f"J_d: {solution.discrete_cost:.3f}   "
                   f"fuel: {solution.fuel_used * 1e3:.1f} g   "
                   f"duration: {solution.duration:.1f} s")
        click.echo(f"iterations: {solution.iterations}   "
                   f"wall time: {wall:.2f} s")

    if solution.converged is Convergence.FAILED:
        sys.exit(EXIT_NO_ADVICE)


@main.command("plan")
@_route_argument
@click.option("--v0", type=float, required=True,
              help="Velocity at the route start, km/h.")
@_solver_options(default_ds=1.0)
@click.option("--out", "out_dir", default=None, metavar="DIR",
              help="Write plan.csv and plan.json into DIR.")
@click.option("--parallel/--no-parallel", default=False, show_default=True,
              help="Solve segments concurrently (identical results).")
@_format_option
def plan_cmd(route_file, v0, ds, w1, w2, params_path, out_dir, parallel,
             fmt) -> None:
    """Plan a whole route and print the per-segment timing table."""
    try:
        config, weights, params = _build(ds, w1, w2, params_path)
        points = _resolve_route(route_file)
        trip = plan_trip(points, kmh_to_ms(v0), weights, config, params,
                         parallel=parallel)
    except _INPUT_ERRORS as exc:
        _fail(str(exc))

    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "plan.csv").write_text(export_plan_csv(trip))
        (out / "plan.json").write_text(
            json.dumps(plan_to_dict(trip), indent=2) + "\n")

    no_advice = [ps.segment.index for ps in trip.segments
                 if ps.solution is None]

    if fmt == "json":
        click.echo(json.dumps({
            "segments": len(trip.segments),
            "total_fuel_kg": trip.total_fuel,
            "total_duration_s": trip.total_duration,
            "incomplete": trip.incomplete,
            "no_advice_segments": no_advice,
            "wall_time_s": [ps.wall_time for ps in trip.segments],
        }, indent=2))
    else:
        click.echo("segm.  time")
        for row, ps in enumerate(trip.segments, start=1):
            click.echo(f"{row:5d}  {ps.wall_time:.2f}")
        click.echo(f"total  {sum(ps.wall_time for ps in trip.segments):.2f}")
        click.echo(f"fuel: {trip.total_fuel:.3f} kg   "
                   f"duration: {trip.total_duration / 60.0:.1f} min   "
                   f"segments: {len(trip.segments)}")
        for idx in no_advice:
            ps = trip.segments[idx]
            click.echo(f"no advice for segment {idx}: {ps.note}")

    if trip.incomplete:
        sys.exit(EXIT_NO_ADVICE)


@main.command("validate")
@_route_argument
@click.option("--segment", "segment_index", type=int, required=True,
              help="Zero-based segment index.")
@_solver_options(default_ds=20.0)
@click.option("--grid-step", type=float, default=0.1, show_default=True,
              help="Reference velocity-grid spacing, m/s.")
@click.option("--budget", type=int, default=None,
              help="Transition budget for the reference sweep.")
@_format_option
def validate(route_file, segment_index, ds, w1, w2, params_path, grid_step,
             budget, fmt) -> None:
    """Compare the solver against the dynamic-programming reference.

    Exits 0 only when the solver's discrete cost is within 5% of the
    reference optimum on the chosen segment.
    """
    try:
        config, weights, params = _build(ds, w1, w2, params_path)
        if budget is not None:
            from dataclasses import replace as _replace
            config = _replace(config, dp_transition_budget=budget)
        points = _resolve_route(route_file)
        v0 = kmh_to_ms(points[0].speed_limit)
        segments = segment_route(points, v0)
        if not 0 <= segment_index < len(segments):
            raise ValueError(f"segment index {segment_index} out of range "
                             f"(route has {len(segments)} segments)")
        seg = segments[segment_index]
    except _INPUT_ERRORS as exc:
        _fail(str(exc))

    t0 = time.perf_counter()
    solution = shoot(seg, weights, config, params)
    t1 = time.perf_counter()
    if solution.converged is Convergence.FAILED:
        _fail(f"solver failed on segment {seg.index}: "
              f"{solution.failure_reason}", EXIT_NO_ADVICE)
    try:
        grid = velocity_grid(config, seg.speed_limit, spacing=grid_step)
        reference = dp_oracle(seg, weights, config, params, grid)
    except BudgetExceededError as exc:
        _fail(str(exc), EXIT_BUDGET)
    except _INPUT_ERRORS as exc:
        _fail(str(exc))
    t2 = time.perf_counter()

    gap = (solution.discrete_cost - reference.optimal_cost) \
        / reference.optimal_cost
    ok = gap <= 0.05

    if fmt == "json":
        click.echo(json.dumps({
            "segment": seg.index,
            "solver_cost": solution.discrete_cost,
            "solver_convergence": solution.converged.value,
            "reference_cost": reference.optimal_cost,
            "reference_transitions": reference.transitions,
            "relative_gap": gap,
            "within_tolerance": ok,
            "solver_wall_s": t1 - t0,
            "reference_wall_s": t2 - t1,
        }, indent=2))
    else:
        click.echo(f"segment {seg.index}: "
                   f"{seg.start_position:.0f}-{seg.end_position:.0f} m, "
                   f"{ms_to_kmh(seg.entry_velocity):.1f} -> "
                   f"{ms_to_kmh(seg.exit_velocity):.1f} km/h, "
                   f"ds={ds:g} m, grid {grid_step:g} m/s")
        click.echo(f"solver    J_d = {solution.discrete_cost:.3f} "
                   f"({solution.converged.value}, {t1 - t0:.2f} s)")
        click.echo(f"reference J   = {reference.optimal_cost:.3f} "
                   f"({reference.transitions} transitions, {t2 - t1:.2f} s)")
        click.echo(f"gap: {gap * 100.0:+.2f}% (tolerance 5%)")

    if not ok:
        sys.exit(1)


@main.command("gen-route")
@click.argument("out_file", metavar="OUT")
@click.option("--kind", type=click.Choice(["valley", "rolling-hills",
                                           "random"]),
              default="random", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="Random seed (random kind only).")
@click.option("--length", type=float, default=8000.0, show_default=True,
              help="Route length in metres (random kind only).")
@click.option("--points", "n_points", type=int, default=320,
              show_default=True, help="Sample count (random kind only).")
def gen_route(out_file, kind, seed, length, n_points) -> None:
    """Write a synthetic route file (CSV). Deterministic per seed."""
    try:
        if kind == "valley":
            pts = valley_route()
        elif kind == "rolling-hills":
            pts = rolling_hills_route()
        else:
            pts = random_route(length=length, n_points=n_points, seed=seed)
        write_route_csv(pts, out_file)
    except _INPUT_ERRORS as exc:
        _fail(str(exc))
    click.echo(f"wrote {len(pts)} points to {out_file}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--params", "params_path", default=None, metavar="FILE",
              help=f"Truck parameter YAML (default: ${PARAMS_ENV} or "
               f"the bundled set).")
@click.option("--ui", "ui_dir", default=None, metavar="DIR",
              help="Static files to serve at / (the drive-along client).")
def serve(host, port, params_path, ui_dir) -> None:
    """Run the advisory HTTP/SSE service."""
    import uvicorn

    from .service import create_app

    try:
        params = _resolve_params(params_path)
    except _INPUT_ERRORS as exc:
        _fail(str(exc))
    app = create_app(params=params, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
