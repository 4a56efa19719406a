"""Fuel/time-optimal driving-mode planning for heavy-duty trucks.

Plans velocity, driving-mode and gear advice over a known route by solving
each route segment as a two-point boundary problem, and serves the result to
onboard clients over HTTP/SSE.
"""

from .costs import CostWeights, costate_derivative, hamiltonian, running_cost
from .dp import BudgetExceededError, DpSolution, dp_oracle, velocity_grid
from .dynamics import (EngineOperatingPoint, Verdict, feasible, mode_dynamics,
                       resistance_force)
from .engine import (engine_speed, friction_torque, fuel_rate,
                     max_brake_torque, max_engine_torque)
from .modes import (DrivingMode, ModePoint, SampleContext, ZERO_FUEL_MODES,
                    candidate_universe, enumerate_candidates)
from .generate import random_route, rolling_hills_route, valley_route
from .params import (ParameterError, TruckParameters, default_parameters,
                     load_parameters, parameters_from_dict)
from .planner import (PlannedSegment, SegmentStatus, TripPlan, advice_at,
                      export_plan_csv, plan_to_dict, plan_trip,
                      recompute_from)
from .route import (EventType, RouteError, RoutePoint, RouteSegment,
                    SegmentationConfig, SlopeClass, SlopeProfile, load_route,
                    parse_route_csv, parse_route_json, route_to_json,
                    segment_route, slope_at, write_route_csv)
from .solver import (Convergence, SegmentSolution, SolverConfig, StepRecord,
                     SweepResult, backward_sweep, shoot)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
