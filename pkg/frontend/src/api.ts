/** Thin fetch wrappers for the advisory service endpoints. */

import { AdviceDoc, PlanDoc, TripCreated } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch { /* keep statusText */ }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export interface OverrideBody {
  segment_index: number;
  actual_velocity_kmh: number;
  reason?: string;
}

export interface TripBody {
  route?: unknown; bundled?: string;
  initial_velocity_kmh?: number; step_length_m?: number;
  fuel_weight?: number; time_weight?: number; parallel?: boolean;
}

export interface ApiClient {
  createTrip(body: TripBody): Promise<TripCreated>;
  fetchPlan(tripId: string): Promise<PlanDoc>;
  fetchAdvice(tripId: string, position: number): Promise<AdviceDoc>;
  postOverride(tripId: string, body: OverrideBody): Promise<{ revision: number }>;
}

export function apiClient(base = "", fetchImpl: typeof fetch = fetch): ApiClient {
  const json = { "content-type": "application/json" };
  return {
    createTrip: (body) =>
      fetchImpl(`${base}/trips`, {
        method: "POST", headers: json, body: JSON.stringify(body),
      }).then((r) => asJson<TripCreated>(r)),
    fetchPlan: (tripId) =>
      fetchImpl(`${base}/trips/${tripId}/plan`).then((r) => asJson<PlanDoc>(r)),
    fetchAdvice: (tripId, position) =>
      fetchImpl(`${base}/trips/${tripId}/advice?position=${position}`)
        .then((r) => asJson<AdviceDoc>(r)),
    postOverride: (tripId, body) =>
      fetchImpl(`${base}/trips/${tripId}/override`, {
        method: "POST", headers: json, body: JSON.stringify(body),
      }).then((r) => asJson<{ revision: number }>(r)),
  };
}
