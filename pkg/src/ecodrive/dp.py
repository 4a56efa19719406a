"""Exhaustive dynamic-programming reference for one segment.

Backward value iteration over a fixed velocity grid using the exact same
per-step transitions (backward RK4, admissibility checks, running cost) as
the sweep solver, with arrival velocities snapped to the nearest grid node.
Slow but assumption-free; used to bound how much the costate solver gives up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .costs import CostWeights
from .modes import DrivingMode, ModePoint
from .params import TruckParameters
from .route import RouteSegment
from .solver import SolverConfig, _grade_tables, _step_count, _validate_boundaries
from .units import kmh_to_ms


class BudgetExceededError(RuntimeError):
    """The instance would need more transition evaluations than allowed."""

    def __init__(self, required: int, budget: int):
        super().__init__(
            f"ground-truth search needs about {required:,} transition "
            f"evaluations, budget is {budget:,}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class DpSolution:
    """Grid-optimal result: total cost, the per-step choices, and the grid
    velocities along the winning path (entry node first, exact exit last)."""

    optimal_cost: float
    mode_path: tuple[ModePoint, ...]
    velocities: tuple[float, ...]
    achieved_initial_velocity: float
    transitions: int


def velocity_grid(config: SolverConfig, speed_limit: float,
                  spacing: float = 0.1) -> np.ndarray:
    """Uniform grid covering [velocity_floor, speed_limit]; spacing in m/s
    (the endpoints stay exact, so the realized spacing is the nearest value
    that divides the span evenly)."""
    lo = kmh_to_ms(config.velocity_floor)
    n = int(round((speed_limit - lo) / spacing))
    return np.linspace(lo, speed_limit, max(n, 1) + 1)


def dp_oracle(
    segment: RouteSegment,
    weights: CostWeights,
    config: SolverConfig,
    params: TruckParameters,
    grid: np.ndarray,
) -> DpSolution:
    """Grid-exhaustive optimum for `segment` under the same discretization.

    The grid must cover [velocity_floor, speed_limit]. Raises
    BudgetExceededError when (steps * nodes * choices) exceeds
    `config.dp_transition_budget`, and ValueError when no admissible path
    connects the boundaries on this grid.
    """
    _validate_boundaries(segment, config)
    grid = np.ascontiguousarray(np.sort(np.asarray(grid, dtype=float)))
    if grid.size < 2:
        raise ValueError("velocity grid needs at least two nodes")
    floor = kmh_to_ms(config.velocity_floor)
    if grid[0] > floor + 1e-9 or grid[-1] < segment.speed_limit - 1e-9:
        raise ValueError(
            f"grid [{grid[0]:.3f}, {grid[-1]:.3f}] does not cover "
            f"[{floor:.3f}, {segment.speed_limit:.3f}] m/s")

    n = _step_count(segment.length, config.step_length)
    if n == 0:
        return DpSolution(0.0, (), (segment.exit_velocity,),
                          segment.exit_velocity, 0)
    required = n * grid.size * _kernels.NUM_CANDIDATES
    if required > config.dp_transition_budget:
        raise BudgetExceededError(required, config.dp_transition_budget)

    ds = segment.length / n
    gt_nodes, gt_mids, gt_lows = _grade_tables(segment, params, n, ds)
    status, cost, modes, gears, vels = _kernels.dp_solve(
        n, segment.start_position, ds, segment.exit_velocity,
        segment.entry_velocity, grid, segment.speed_limit, floor,
        weights.fuel_weight, weights.time_weight,
        gt_nodes, gt_mids, gt_lows, params.kernel)
    if status != _kernels.DP_OK:
        raise ValueError("no admissible path reaches the exit velocity "
                         "from the entry velocity on this grid")
    mode_path = tuple(
        ModePoint(DrivingMode(int(m)), int(g)) for m, g in zip(modes, gears))
    return DpSolution(
        optimal_cost=float(cost), mode_path=mode_path,
        velocities=tuple(float(x) for x in vels),
        achieved_initial_velocity=float(vels[0]), transitions=required)
