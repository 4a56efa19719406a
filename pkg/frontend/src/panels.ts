/**
 * @fileoverview Advice card, no-advice banner and the trip summary strip.
 * All pure string renders; main.ts owns the event wiring.
 */

import { AdviceDoc, PlanDoc, VELOCITY_FLOOR_KMH } from "./types.js";
import { fmtDistance, fmtFuel, fmtMinutes, fmtSpeed } from "./units.js";

const modeLabel = (mode: string) => mode.replace(/_/g, " ");

export function renderSummary(plan: PlanDoc | null, connected: boolean,
                              recomputing: boolean): string {
  const dot = `<span class="dot ${connected ? "ok" : "off"}" ` +
    `title="${connected ? "live" : "reconnecting"}"></span>`;
  if (!plan) return `<div class="summary">${dot} loading plan…</div>`;
  const spin = recomputing ? `<span class="spin">recomputing…</span>` : "";
  const gaps = plan.incomplete ? `<span class="gaps">has no-advice gaps</span>` : "";
  return `<div class="summary">${dot}` +
    `<span>rev ${plan.revision}</span>` +
    `<span>${fmtDistance(plan.route_length_m)}</span>` +
    `<span>${fmtFuel(plan.total_fuel_kg)}</span>` +
    `<span>${fmtMinutes(plan.total_duration_s)}</span>` +
    `<span>start ${fmtSpeed(plan.initial_velocity_kmh)}</span>` +
    `${gaps}${spin}</div>`;
}

export function renderAdviceCard(advice: AdviceDoc | null, plan: PlanDoc | null,
                                 overrideBusy: boolean): string {
  if (!advice || !plan) {
    return `<div class="advice-empty">Move the cursor to see advice.</div>`;
  }
  const seg = plan.segments[advice.segment_index];
  const limit = seg ? seg.speed_limit_kmh : 90;
  const boundary =
    `<div class="row"><span>next boundary</span>` +
    `<b>${fmtDistance(advice.distance_to_boundary_m)}</b></div>` +
    `<div class="row"><span>${advice.next_event ? modeLabel(advice.next_event) : "slope change"}</span>` +
    `<b>exit at ${fmtSpeed(advice.exit_velocity_kmh)}</b></div>`;
  const form = overrideForm(advice, limit, overrideBusy);

  if (!advice.advice) {
    return `<div class="no-advice" role="status">` +
      `<h2>No advice here</h2>` +
      `<p>The solver could not connect this segment's boundary speeds. ` +
      `Drive to conditions; advice resumes at the next segment.</p>` +
      `${boundary}${form}</div>`;
  }
  const a = advice.advice;
  return `<div class="advice-card">` +
    `<div class="target">${fmtSpeed(a.target_velocity_kmh)}</div>` +
    `<div class="chips"><span class="chip chip-${a.mode}">${modeLabel(a.mode)}</span>` +
    `<span class="chip gear">gear ${a.gear > 0 ? a.gear : "N"}</span></div>` +
    boundary +
    `<button id="follow" class="follow">Follow</button>` +
    form +
    `</div>`;
}

function overrideForm(advice: AdviceDoc, limitKmh: number, busy: boolean): string {
  const preset = advice.advice
    ? Math.round(advice.advice.target_velocity_kmh * 10) / 10
    : limitKmh;
  return `<form id="override-form" class="override">` +
    `<label for="override-v">I'm actually doing</label>` +
    `<input id="override-v" name="v" type="number" step="0.1" ` +
    `min="${VELOCITY_FLOOR_KMH}" max="${limitKmh}" value="${preset}" ` +
    `${busy ? "disabled" : ""}> km/h ` +
    `<button type="submit" ${busy ? "disabled" : ""}>` +
    `${busy ? "Recomputing…" : "Override"}</button></form>`;
}

export function renderNotice(notice: string | null): string {
  return notice ? `<div class="notice" role="alert">${notice}</div>` : "";
}
