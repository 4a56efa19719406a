/** Hand-built plan documents for render and store tests, plus a fragment
 * extractor mirroring how the lanes group per-segment markup. */

import { AdviceDoc, PlanDoc, PlanSegment, PlanStep } from "../src/types.js";

export function mkStep(position_m: number, velocity_kmh: number,
                       mode = "cruising", gear = 10): PlanStep {
  return {
    position_m, velocity_kmh, gear, mode,
    engine_speed_rpm: 1200, engine_torque_nm: 600, brake_torque_nm: 0,
    fuel_rate_gps: mode === "cruising" ? 4 : 0,
  };
}

export function mkSegment(index: number, start: number, end: number,
                          over: Partial<PlanSegment> = {}): PlanSegment {
  return {
    index, start_position_m: start, end_position_m: end,
    speed_limit_kmh: 80, entry_velocity_kmh: 80, exit_velocity_kmh: 80,
    slope_class: "negligible", terminating_event: null, status: "advised",
    brake_warning: false, convergence: "tight", steps: [],
    ...over,
  };
}

/** Two segments over a 1 km route: an advised 0-600 m stretch ending at a
 * red light, then a 600-1000 m no-advice gap. Limit drops to 60 at 600 m. */
export function mkPlan(over: Partial<PlanDoc> = {}): PlanDoc {
  const seg0 = mkSegment(0, 0, 600, {
    terminating_event: "red_light",
    exit_velocity_kmh: 8,
    steps: [
      mkStep(0, 80), mkStep(100, 80), mkStep(200, 80),
      mkStep(300, 60, "eco_roll", 0), mkStep(400, 45, "eco_roll", 0),
      mkStep(500, 25, "engine_braking", 8),
    ],
  });
  const seg1 = mkSegment(1, 600, 1000, {
    status: "no-advice", convergence: "failed", speed_limit_kmh: 60,
    entry_velocity_kmh: 8, exit_velocity_kmh: 60,
    terminating_event: "destination", note: "entry error saturated",
  });
  return {
    trip_id: "t1", revision: 1, initial_velocity_kmh: 80,
    total_fuel_kg: 1.25, total_duration_s: 90, incomplete: true,
    route_length_m: 1000,
    segments: [seg0, seg1],
    route: [
      { position_m: 0, elevation_m: 10, speed_limit_kmh: 80 },
      { position_m: 600, elevation_m: 5, speed_limit_kmh: 60, event: "red_light" },
      { position_m: 1000, elevation_m: 0, speed_limit_kmh: 60, event: "destination" },
    ],
    ...over,
  };
}

export function mkAdvice(over: Partial<AdviceDoc> = {}): AdviceDoc {
  return {
    trip_id: "t1", revision: 1, position_m: 200, segment_index: 0,
    status: "advised", distance_to_boundary_m: 400, next_event: "red_light",
    exit_velocity_kmh: 8,
    advice: { mode: "cruising", gear: 10, target_velocity_kmh: 80, position_m: 200 },
    ...over,
  };
}

/** Per-segment markup of one lane; groups are flat, so a lazy match works. */
export function segGroup(svg: string, index: number): string {
  const m = svg.match(new RegExp(`<g data-seg="${index}">.*?</g>`, "s"));
  return m ? m[0] : "";
}

export const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export async function until(cond: () => boolean, ms = 5000): Promise<void> {
  const t0 = Date.now();
  while (!cond()) {
    if (Date.now() - t0 > ms) throw new Error("condition not met in time");
    await sleep(20);
  }
}
