/**
 * @fileoverview Wire types for the advisory service HTTP/SSE API.
 *
 * These mirror the JSON the trip endpoints serve. The UI treats every
 * document as read-only: lanes render whatever the last served revision
 * said, nothing is ever mutated client-side.
 */

export interface RoutePoint {
  position_m: number; elevation_m: number; speed_limit_kmh: number;
  event?: string; event_param?: number | null;
}

export interface PlanStep {
  position_m: number; velocity_kmh: number; gear: number; mode: string;
  engine_speed_rpm: number; engine_torque_nm: number;
  brake_torque_nm: number; fuel_rate_gps: number;
}

export interface PlanSegment {
  index: number; start_position_m: number; end_position_m: number;
  speed_limit_kmh: number; entry_velocity_kmh: number; exit_velocity_kmh: number;
  slope_class: string; terminating_event: string | null; status: string;
  brake_warning: boolean; convergence: string; steps: PlanStep[];
  fuel_kg?: number; duration_s?: number; note?: string;
}

export interface PlanDoc {
  trip_id: string; revision: number;
  initial_velocity_kmh: number; total_fuel_kg: number; total_duration_s: number;
  incomplete: boolean; route_length_m: number;
  segments: PlanSegment[]; route: RoutePoint[];
}

export interface Advice {
  mode: string; gear: number; target_velocity_kmh: number; position_m: number;
}

export interface AdviceDoc {
  trip_id: string; revision: number; position_m: number;
  segment_index: number; status: string; distance_to_boundary_m: number;
  next_event: string | null; exit_velocity_kmh: number;
  advice: Advice | null;
}

export interface TripSummary {
  segments: number; total_fuel_kg: number; total_duration_s: number;
  incomplete: boolean; route_length_m: number; initial_velocity_kmh: number;
  no_advice_segments: number[];
}

export interface TripCreated {
  trip_id: string; revision: number; summary: TripSummary;
}

/** The solver never plans below this; the service rejects overrides under it. */
export const VELOCITY_FLOOR_KMH = 8;
