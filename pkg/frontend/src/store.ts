/**
 * @fileoverview Single source of truth for the screen.
 *
 * Holds the last served plan document untouched and re-renders from it;
 * revisions only move forward, stale fetches are dropped. One override may
 * be in flight at a time, mirroring the service's own recompute lock.
 */

import { ApiClient, ApiError } from "./api.js";
import { AdviceDoc, PlanDoc, VELOCITY_FLOOR_KMH } from "./types.js";
import { clamp } from "./units.js";

export interface StoreState {
  tripId: string | null;
  plan: PlanDoc | null;
  revision: number;
  cursor: number;
  advice: AdviceDoc | null;
  overrideBusy: boolean;
  recomputing: boolean;
  connected: boolean;
  notice: string | null;
}

type Listener = (state: StoreState) => void;

export class Store {
  private state: StoreState = {
    tripId: null, plan: null, revision: 0, cursor: 0, advice: null,
    overrideBusy: false, recomputing: false, connected: false, notice: null,
  };
  private listeners: Listener[] = [];

  constructor(private api: ApiClient) {}

  get current(): StoreState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  private set(patch: Partial<StoreState>): void {
    this.state = { ...this.state, ...patch };
    this.emit();
  }

  attachTrip(tripId: string): void {
    this.set({ tripId });
  }

  /** Adopt a served plan unless we already hold a newer revision. */
  applyPlan(doc: PlanDoc): void {
    if (doc.revision < this.state.revision) return;
    this.set({
      plan: doc,
      revision: doc.revision,
      cursor: clamp(this.state.cursor, 0, doc.route_length_m),
    });
  }

  async loadPlan(): Promise<void> {
    if (!this.state.tripId) return;
    this.applyPlan(await this.api.fetchPlan(this.state.tripId));
    await this.refreshAdvice();
  }

  async setCursor(position: number): Promise<void> {
    const len = this.state.plan ? this.state.plan.route_length_m : 0;
    this.set({ cursor: clamp(position, 0, len) });
    await this.refreshAdvice();
  }

  moveCursor(delta: number): Promise<void> {
    return this.setCursor(this.state.cursor + delta);
  }

  /** Advance the cursor to the next planned sample. No-advice segments have
   * no samples; their boundaries stand in, so the cursor passes through. */
  follow(): Promise<void> {
    const plan = this.state.plan;
    if (!plan) return Promise.resolve();
    const here = this.state.cursor + 1e-6;
    for (const seg of plan.segments) {
      if (seg.end_position_m <= here) continue;
      const positions = seg.steps.length > 0
        ? seg.steps.map((s) => s.position_m)
        : [seg.start_position_m, seg.end_position_m];
      for (const p of positions) {
        if (p > here) return this.setCursor(p);
      }
    }
    return this.setCursor(plan.route_length_m);
  }

  activeSegmentIndex(): number {
    const plan = this.state.plan;
    if (!plan || plan.segments.length === 0) return 0;
    for (const seg of plan.segments) {
      if (this.state.cursor < seg.end_position_m) return seg.index;
    }
    return plan.segments[plan.segments.length - 1].index;
  }

  async refreshAdvice(): Promise<void> {
    const { tripId, cursor } = this.state;
    if (!tripId || !this.state.plan) return;
    const doc = await this.api.fetchAdvice(tripId, cursor);
    // drop late responses: cursor moved on, or an older revision answered
    if (doc.position_m !== this.state.cursor) return;
    if (doc.revision < this.state.revision) return;
    this.set({ advice: doc });
  }

  /** Report the actual velocity for the segment under the cursor. Bounds are
   * checked locally first; the service re-checks and replies 422 anyway. */
  async override(velocityKmh: number, reason = ""): Promise<void> {
    const plan = this.state.plan;
    if (!plan || !this.state.tripId) return;
    if (this.state.overrideBusy) {
      this.set({ notice: "a recompute is already in flight" });
      return;
    }
    const segIndex = this.activeSegmentIndex();
    const limit = plan.segments[segIndex].speed_limit_kmh;
    if (velocityKmh < VELOCITY_FLOOR_KMH || velocityKmh > limit) {
      this.set({
        notice: `override must stay within ${VELOCITY_FLOOR_KMH} and ${limit} km/h`,
      });
      return;
    }
    this.set({ overrideBusy: true, notice: null });
    try {
      await this.api.postOverride(this.state.tripId, {
        segment_index: segIndex, actual_velocity_kmh: velocityKmh, reason,
      });
    } catch (err) {
      const detail = err instanceof ApiError ? err.message : "override failed";
      this.set({ overrideBusy: false, notice: detail });
    }
  }

  setConnected(connected: boolean): void {
    if (connected !== this.state.connected) this.set({ connected });
  }

  clearNotice(): void {
    if (this.state.notice) this.set({ notice: null });
  }

  /** React to one server-push event. */
  async handleEvent(name: string, data: Record<string, unknown>): Promise<void> {
    switch (name) {
      case "connected": {
        const rev = Number(data.revision ?? 0);
        this.set({ connected: true });
        if (rev > this.state.revision && this.state.plan) await this.loadPlan();
        break;
      }
      case "recompute-started":
        this.set({ recomputing: true });
        break;
      case "no-advice":
        this.set({ notice: `no advice for segment ${data.segment}; drive to conditions` });
        break;
      case "recompute-done":
        this.set({ recomputing: false, overrideBusy: false });
        await this.loadPlan();
        break;
    }
  }
}
