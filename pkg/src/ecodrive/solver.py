"""Two-point boundary solver for one route segment.

The segment problem: reach `exit_velocity` at the segment end having started
at `entry_velocity`, choosing a (mode, gear) per step so the accumulated
fuel/time cost is minimal. It is solved by backward sweeps: from the known
terminal velocity and a guessed terminal costate, integrate velocity and
costate backward one RK4 step at a time, picking at each sample the
admissible choice with the smallest Hamiltonian. The guessed costate is then
driven by bisection until the sweep lands on the requested entry velocity.

Convergence taxonomy:
    tight          entry error within `tight_velocity_tol`
    stalled-loose  bisection iterates stopped moving (mode quantization)
                   while the error is within `loose_velocity_tol`
    failed         neither, within `max_shooting_iterations`
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .costs import CostWeights
from .dynamics import EngineOperatingPoint
from .modes import DrivingMode, ModePoint
from .params import TruckParameters
from .route import RouteSegment
from .units import kmh_to_ms

# Terminal costates beyond this magnitude mark a bracket endpoint rather
# than a bisection product; solutions accepted there are re-anchored by
# shrinking the costate toward zero while convergence survives.
_EXTREME_COSTATE = 1.0e3

# Costates probed when a solution is only accepted at the loose tolerance.
# The magnitudes span the scale the running cost induces (fuel and time
# terms put the interesting Hamiltonian trade-offs within a few hundred).
_POLISH_LADDER = (0.0, -0.01, 0.01, -0.1, 0.1, -1.0, 1.0, -3.0, 3.0,
                  -10.0, 10.0, -30.0, 30.0, -100.0, 100.0, -300.0, 300.0)


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings. Velocity tolerances and the floor are km/h to
    match how operators reason about them; everything else is SI."""

    step_length: float = 1.0                    # m
    tight_velocity_tol: float = 0.01            # km/h
    loose_velocity_tol: float = 1.0             # km/h
    costate_stall_tol: float = 0.0002
    max_shooting_iterations: int = 100
    costate_bracket_seed: tuple[float, float] = (-1.0e6, 1.0e6)
    max_bracket_expansions: int = 60
    velocity_floor: float = 8.0                 # km/h
    max_gear_step: int = 0                      # 0 disables the gear-jump cap
    dp_transition_budget: int = 20_000_000

    def __post_init__(self):
        if self.step_length <= 0.0:
            raise ValueError("step_length must be positive")
        if not 0.0 < self.tight_velocity_tol <= self.loose_velocity_tol:
            raise ValueError("need 0 < tight tolerance <= loose tolerance")
        if self.costate_stall_tol <= 0.0:
            raise ValueError("costate_stall_tol must be positive")
        if self.max_shooting_iterations < 1:
            raise ValueError("max_shooting_iterations must be at least 1")
        lo, hi = self.costate_bracket_seed
        if not lo < hi:
            raise ValueError("costate bracket seed must satisfy lo < hi")
        if self.velocity_floor <= 0.0:
            raise ValueError("velocity_floor must be positive")
        if self.max_gear_step < 0:
            raise ValueError("max_gear_step must be nonnegative")
        if self.dp_transition_budget < 1:
            raise ValueError("dp_transition_budget must be positive")


class Convergence(str, Enum):
    TIGHT = "tight"
    STALLED_LOOSE = "stalled-loose"
    FAILED = "failed"


@dataclass(frozen=True)
class StepRecord:
    """State and decision at one sample. The choice governs the interval
    from this sample to the next; the operating point, running cost and
    Hamiltonian are evaluated at this sample's own state. The terminal
    record repeats the last interval's choice for display."""

    position: float            # m
    velocity: float            # m/s
    costate: float
    choice: ModePoint
    op_point: EngineOperatingPoint
    hamiltonian: float
    running_cost: float
    forced: bool = False


@dataclass(frozen=True)
class SweepResult:
    """One backward pass at a fixed terminal costate. Fuel in kg,
    duration in s."""

    ok: bool
    steps: tuple[StepRecord, ...] | None
    achieved_initial_velocity: float | None
    discrete_cost: float
    fuel_used: float
    duration: float
    forced_steps: int
    failure_index: int | None = None


@dataclass(frozen=True)
class SegmentSolution:
    """Shooting outcome for one segment. Fuel in kg, duration in s."""

    steps: tuple[StepRecord, ...]
    terminal_costate: float
    achieved_initial_velocity: float
    converged: Convergence
    iterations: int
    discrete_cost: float
    fuel_used: float
    duration: float
    forced_steps: int
    bracket: tuple[float, float] | None = None
    failure_reason: str | None = None

    @property
    def entry_error_kmh(self) -> float:
        """Signed boundary miss in km/h (target minus achieved); only
        meaningful for the segment it was solved against."""
        return self._entry_error

    _entry_error: float = 0.0


def _step_count(length: float, step_length: float) -> int:
    if length <= 0.0:
        return 0
    return max(1, round(length / step_length))


def _segment_arrays(segment: RouteSegment):
    return (np.ascontiguousarray(segment.profile.midpoints, dtype=float),
            np.ascontiguousarray(segment.profile.gradients, dtype=float))


def _validate_boundaries(segment: RouteSegment, config: SolverConfig) -> None:
    floor = kmh_to_ms(config.velocity_floor)
    for name, v in (("entry", segment.entry_velocity),
                    ("exit", segment.exit_velocity)):
        if not floor - 1e-9 <= v <= segment.speed_limit + 1e-9:
            raise ValueError(
                f"{name} velocity {v:.3f} m/s outside "
                f"[{floor:.3f}, {segment.speed_limit:.3f}] m/s")


def _grade_tables(segment: RouteSegment, params: TruckParameters,
                  n: int, ds: float):
    """Grade terms at every sample and RK4 stage position of the segment;
    computed once and shared by all sweeps of a shoot."""
    xs, grads = _segment_arrays(segment)
    return _kernels.grade_tables(n, segment.start_position, ds, xs, grads,
                                 params.kernel)


def _raw_sweep(segment: RouteSegment, terminal_costate: float,
               weights: CostWeights, config: SolverConfig,
               params: TruckParameters, n: int, ds: float, tables):
    gt_nodes, gt_mids, gt_lows = tables
    return _kernels.sweep(
        n, segment.start_position, ds,
        segment.exit_velocity, terminal_costate,
        segment.speed_limit, kmh_to_ms(config.velocity_floor),
        segment.entry_velocity,
        weights.fuel_weight, weights.time_weight,
        config.max_gear_step, gt_nodes, gt_mids, gt_lows, params.kernel)


def _materialize(segment: RouteSegment, n: int, ds: float,
                 v: np.ndarray, lam: np.ndarray, mode: np.ndarray,
                 gear: np.ndarray, forced: np.ndarray,
                 weights: CostWeights, params: TruckParameters,
                 ) -> tuple[StepRecord, ...]:
    k = params.kernel
    w1, w2 = weights.fuel_weight, weights.time_weight
    records = []
    for i in range(n + 1):
        s = segment.start_position + i * ds
        slope = segment.profile.at(s)
        m = int(mode[i])
        g = int(gear[i])
        f, omega, te, teb, mf = _kernels.mode_eval(m, g, v[i], slope, k)
        gcost = (w1 * mf * 1e-3 + w2) / v[i]
        records.append(StepRecord(
            position=s,
            velocity=float(v[i]),
            costate=float(lam[i]),
            choice=ModePoint(DrivingMode(m), g),
            op_point=EngineOperatingPoint(omega, te, teb, mf),
            hamiltonian=gcost + float(lam[i]) * f,
            running_cost=gcost,
            forced=bool(forced[i]),
        ))
    return tuple(records)


def backward_sweep(
    terminal_costate: float,
    segment: RouteSegment,
    weights: CostWeights,
    config: SolverConfig,
    params: TruckParameters,
) -> SweepResult:
    """One backward pass from (end, exit_velocity, terminal_costate).

    Returns the full step trajectory and the entry velocity it lands on;
    `ok=False` with `failure_index` when even the forced recovery mode
    cannot continue at some sample.
    """
    _validate_boundaries(segment, config)
    n = _step_count(segment.length, config.step_length)
    if n == 0:
        return SweepResult(True, (), segment.exit_velocity, 0.0, 0.0, 0.0, 0)
    ds = segment.length / n
    tables = _grade_tables(segment, params, n, ds)
    status, fail_k, v, lam, mode, gear, forced, jd, fuel, dur = _raw_sweep(
        segment, terminal_costate, weights, config, params, n, ds, tables)
    if status != _kernels.SWEEP_OK:
        return SweepResult(False, None, None, jd, fuel, dur,
                           int(forced.sum()), failure_index=int(fail_k))
    steps = _materialize(segment, n, ds, v, lam, mode, gear, forced,
                         weights, params)
    return SweepResult(True, steps, float(v[0]), float(jd), float(fuel),
                       float(dur), int(forced.sum()))


def shoot(
    segment: RouteSegment,
    weights: CostWeights,
    config: SolverConfig,
    params: TruckParameters,
    costate_seed: float | None = None,
) -> SegmentSolution:
    """Solve one segment by bisection on the terminal costate.

    The seed bracket (from `config`, or `costate_seed` +/- 1 when warm
    starting) is expanded geometrically until the entry-velocity error
    changes sign across it, then bisected. Every sweep, including bracket
    evaluations, is checked against the tight tolerance; the stall check
    compares consecutive bisection iterates. A solution accepted at a far
    bracket endpoint is re-anchored at the smallest costate magnitude that
    preserves its convergence class, so extreme seeds cannot hand back
    trajectories shaped by costate blow-up.
    """
    _validate_boundaries(segment, config)
    n = _step_count(segment.length, config.step_length)
    if n == 0:
        return SegmentSolution(
            steps=(), terminal_costate=0.0,
            achieved_initial_velocity=segment.exit_velocity,
            converged=Convergence.TIGHT, iterations=0, discrete_cost=0.0,
            fuel_used=0.0, duration=0.0, forced_steps=0)
    ds = segment.length / n
    tables = _grade_tables(segment, params, n, ds)

    tight = kmh_to_ms(config.tight_velocity_tol)
    loose = kmh_to_ms(config.loose_velocity_tol)
    target = segment.entry_velocity

    sweeps = 0
    best = None  # (abs_err, lam, err, raw arrays)

    def evaluate(lam_f: float):
        """Sweep at lam_f; returns signed error target - achieved, or None
        on hard failure."""
        nonlocal sweeps, best
        sweeps += 1
        out = _raw_sweep(segment, lam_f, weights, config, params, n, ds,
                         tables)
        status = out[0]
        if status != _kernels.SWEEP_OK:
            return None, out
        err = target - float(out[2][0])
        if best is None or abs(err) < best[0]:
            best = (abs(err), lam_f, err, out)
        return err, out

    def solution(lam_f, out, converged, bracket, reason=None):
        _, _, v, lam, mode, gear, forced, jd, fuel, dur = out
        steps = _materialize(segment, n, ds, v, lam, mode, gear, forced,
                             weights, params)
        sol = SegmentSolution(
            steps=steps, terminal_costate=lam_f,
            achieved_initial_velocity=float(v[0]), converged=converged,
            iterations=sweeps, discrete_cost=float(jd),
            fuel_used=float(fuel), duration=float(dur),
            forced_steps=int(forced.sum()), bracket=bracket,
            failure_reason=reason)
        object.__setattr__(sol, "_entry_error",
                           (target - float(v[0])) * 3.6)
        return sol

    def anchored(lam_f, out, converged, bracket, reason=None):
        """Accept an endpoint-derived solution, first sliding the costate
        toward zero as far as the convergence class allows. Presented
        bracket endpoints sit orders of magnitude beyond the scale the
        running cost induces, and sweeps there can pass the boundary check
        with trajectories dominated by costate overflow; the chain at
        minimal |lambda_N| with the same classification is the physical
        representative of the same solution family."""
        if abs(lam_f) < _EXTREME_COSTATE:
            return solution(lam_f, out, converged, bracket, reason)
        band = tight if converged is Convergence.TIGHT else loose
        t_bad, t_good = 0.0, 1.0
        while (sweeps < config.max_shooting_iterations
               and (t_good - t_bad) * abs(lam_f) > config.costate_stall_tol):
            t_mid = 0.5 * (t_bad + t_good)
            e_mid, out_mid = evaluate(t_mid * lam_f)
            if e_mid is not None and abs(e_mid) <= band:
                t_good, out = t_mid, out_mid
                if abs(e_mid) <= tight:
                    converged, band = Convergence.TIGHT, tight
            else:
                t_bad = t_mid
        return solution(t_good * lam_f, out, converged, bracket, reason)

    def refine(sol):
        """Probe the costate ladder for a cheaper chain in the same class.

        Bisection returns the first boundary-feasible extremal its search
        path crosses, but several extremal families can satisfy the same
        boundaries at very different cost (a floor-crawl and a
        sprint-and-glide both connect the same velocities). The ladder
        spans the costate scale the running cost induces; the cheapest
        probe within the accepted band replaces the solution. A tight
        acceptance only ever trades for another tight chain; a loose one
        may also upgrade to a tight probe."""
        cand_t = None
        cand_l = None
        for lam in _POLISH_LADDER:
            if sweeps >= config.max_shooting_iterations:
                break
            err, out = evaluate(lam)
            if err is None:
                continue
            jd = float(out[7])
            if abs(err) <= tight and (cand_t is None or jd < cand_t[0]):
                cand_t = (jd, lam, out)
            if abs(err) <= loose and (cand_l is None or jd < cand_l[0]):
                cand_l = (jd, lam, out)
        if sol.converged is Convergence.TIGHT:
            if cand_t is not None and cand_t[0] < sol.discrete_cost:
                return solution(cand_t[1], cand_t[2], Convergence.TIGHT,
                                sol.bracket)
            return sol
        if cand_t is not None:
            return solution(cand_t[1], cand_t[2], Convergence.TIGHT,
                            sol.bracket)
        if cand_l is not None and cand_l[0] < sol.discrete_cost:
            return solution(cand_l[1], cand_l[2], Convergence.STALLED_LOOSE,
                            sol.bracket, sol.failure_reason)
        return sol

    def done(sol):
        """Final acceptance policy. Loose solutions always get the ladder
        pass; tight ones only when the chain spends a stretch pinned at
        the velocity floor, the signature of an expensive crawl family."""
        if sol.converged is Convergence.STALLED_LOOSE:
            return refine(sol)
        if sol.converged is Convergence.TIGHT and sol.steps:
            floor = kmh_to_ms(config.velocity_floor) + 0.05
            crawl = sum(1 for st in sol.steps if st.velocity <= floor)
            if crawl >= max(3, len(sol.steps) // 20):
                return refine(sol)
        return sol

    def failed(bracket, reason):
        if best is not None:
            return solution(best[1], best[3], Convergence.FAILED, bracket,
                            reason)
        return SegmentSolution(
            steps=(), terminal_costate=0.0,
            achieved_initial_velocity=float("nan"),
            converged=Convergence.FAILED, iterations=sweeps,
            discrete_cost=float("nan"), fuel_used=float("nan"),
            duration=float("nan"), forced_steps=0, bracket=bracket,
            failure_reason=reason)

    if costate_seed is None:
        lo, hi = config.costate_bracket_seed
    else:
        lo, hi = costate_seed - 1.0, costate_seed + 1.0

    e_lo, out_lo = evaluate(lo)
    if e_lo is not None and abs(e_lo) <= tight:
        return done(anchored(lo, out_lo, Convergence.TIGHT, (lo, hi)))
    e_hi, out_hi = evaluate(hi)
    if e_hi is not None and abs(e_hi) <= tight:
        return done(anchored(hi, out_hi, Convergence.TIGHT, (lo, hi)))

    # Expand geometrically until the error changes sign across the bracket.
    # When the target sits at the edge of what the mode set can reach (entry
    # pinned at the limit or the floor), the error never changes sign and
    # the endpoint errors saturate; accept the best landing as a loose
    # solution if it is within tolerance.
    def one_sided(reason):
        # Expansion only samples outward, but the closest reachable entry
        # often sits at interior costates the endpoints overshoot (the
        # same blow-up `anchored` guards against). Probe the ladder before
        # giving up.
        for lam in _POLISH_LADDER:
            if (sweeps >= config.max_shooting_iterations
                    or (best is not None and best[0] <= tight)):
                break
            evaluate(lam)
        if best is not None and best[0] <= loose:
            conv = (Convergence.TIGHT if best[0] <= tight
                    else Convergence.STALLED_LOOSE)
            # A one-sided acceptance is a rescue, not a root: always give
            # the ladder a chance to swap in a cheaper chain of the same
            # class.
            return refine(anchored(best[1], best[3], conv, (lo, hi),
                                   reason))
        return failed((lo, hi), reason)

    expansions = 0
    saturated = 0
    while (e_lo is None or e_hi is None or np.sign(e_lo) == np.sign(e_hi)):
        if expansions >= config.max_bracket_expansions:
            return one_sided("no sign change within bracket expansions")
        width = hi - lo
        lo -= width / 2.0
        hi += width / 2.0
        expansions += 1
        e_lo_prev, e_hi_prev = e_lo, e_hi
        e_lo, out_lo = evaluate(lo)
        if e_lo is not None and abs(e_lo) <= tight:
            return done(anchored(lo, out_lo, Convergence.TIGHT, (lo, hi)))
        e_hi, out_hi = evaluate(hi)
        if e_hi is not None and abs(e_hi) <= tight:
            return done(anchored(hi, out_hi, Convergence.TIGHT, (lo, hi)))
        if e_lo == e_lo_prev and e_hi == e_hi_prev:
            saturated += 1
            if saturated >= 2:
                return one_sided("entry error saturated on one side of zero")
        else:
            saturated = 0

    bracket = (lo, hi)
    prev_mid = None
    for _ in range(config.max_shooting_iterations):
        mid = 0.5 * (lo + hi)
        e_mid, out_mid = evaluate(mid)
        if e_mid is None:
            # Hard failure inside the bracket: shrink toward the endpoint
            # whose sweep succeeded.
            hi = mid if e_lo is not None else hi
            lo = mid if e_lo is None else lo
            continue
        if abs(e_mid) <= tight:
            return done(solution(mid, out_mid, Convergence.TIGHT, bracket))
        if (prev_mid is not None
                and abs(mid - prev_mid) <= config.costate_stall_tol
                and abs(e_mid) <= loose):
            return done(solution(mid, out_mid, Convergence.STALLED_LOOSE,
                                 bracket))
        prev_mid = mid
        if np.sign(e_mid) == np.sign(e_lo):
            lo, e_lo = mid, e_mid
        else:
            hi, e_hi = mid, e_mid
    return failed(bracket, "iteration limit before convergence")
