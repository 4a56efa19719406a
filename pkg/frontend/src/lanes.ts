/**
 * @fileoverview The three distance lanes, rendered as SVG strings.
 *
 * Elevation, velocity profile and mode/gear strip all draw against one
 * shared Scale, so a road position lands on the same x in every lane.
 * Per-segment content lives in flat `<g data-seg="N">` groups whose markup
 * depends only on that segment and the scale; cursor and highlight are
 * separate overlays, so a segment's fragment is stable until the plan
 * revision behind it actually changes.
 */

import { PlanDoc, PlanSegment, RoutePoint } from "./types.js";
import { Scale, linearScale, ticks } from "./scale.js";

export const LANE_W = 960;
export const PAD_L = 46;
export const PAD_R = 14;
export const ELEV_H = 110;
export const VEL_H = 150;
export const MODE_H = 42;
export const AXIS_H = 24;
const GEAR_LABEL_MIN_PX = 26; // narrower runs stay unlabeled

export const MODE_COLORS: Record<string, string> = {
  cruising: "#2d7ff9", eco_roll: "#35b56b", coasting: "#8e7cc3",
  engine_braking: "#e2574c", downhill: "#1fa8a0", max_acceleration: "#f0a202",
};

export const EVENT_COLORS: Record<string, string> = {
  red_light: "#d7263d", stop: "#d7263d", turn: "#e8871e",
  limit_change: "#5b6ee1", destination: "#2a9d2a",
};

const fmt = (n: number) => String(Math.round(n * 100) / 100);

export function laneScale(routeLengthM: number, width = LANE_W): Scale {
  return linearScale([0, routeLengthM], [PAD_L, width - PAD_R]);
}

function svgOpen(cls: string, h: number): string {
  return `<svg class="lane ${cls}" width="${LANE_W}" height="${h}" ` +
    `viewBox="0 0 ${LANE_W} ${h}" role="img">`;
}

const HATCH =
  `<defs><pattern id="hatch" patternUnits="userSpaceOnUse" width="8" height="8">` +
  `<path d="M0 8 L8 0" stroke="#b9b9b9" stroke-width="1.2"/></pattern></defs>`;

function noAdviceBlock(seg: PlanSegment, scale: Scale, h: number): string {
  const x0 = scale.x(seg.start_position_m);
  const x1 = scale.x(seg.end_position_m);
  const w = x1 - x0;
  let out = `<rect class="na" x="${fmt(x0)}" y="4" width="${fmt(w)}" ` +
    `height="${h - 8}" fill="url(#hatch)" stroke="#b9b9b9"/>`;
  if (w >= 70) {
    out += `<text x="${fmt((x0 + x1) / 2)}" y="${fmt(h / 2 + 4)}" ` +
      `class="na-label" text-anchor="middle">no advice</text>`;
  }
  return out;
}

/** Highlight rect for the segment under the cursor. Drawn first so lane
 * content paints over it. */
function highlightRect(plan: PlanDoc, scale: Scale, active: number, h: number): string {
  const seg = plan.segments[active];
  if (!seg) return "";
  const x0 = scale.x(seg.start_position_m);
  const w = scale.x(seg.end_position_m) - x0;
  return `<rect class="hl" x="${fmt(x0)}" y="0" width="${fmt(w)}" height="${h}"/>`;
}

function cursorLine(scale: Scale, cursor: number, h: number): string {
  const x = fmt(scale.x(cursor));
  return `<line class="cursor" x1="${x}" y1="0" x2="${x}" y2="${h}"/>`;
}

export function renderElevationLane(plan: PlanDoc, scale: Scale,
                                    cursor: number, active: number): string {
  const pts = plan.route;
  const elevs = pts.map((p) => p.elevation_m);
  const lo = Math.min(...elevs);
  const hi = Math.max(...elevs);
  const pad = Math.max(1, (hi - lo) * 0.12);
  const y = linearScale([lo - pad, hi + pad], [ELEV_H - 6, 6]);

  let out = svgOpen("elev", ELEV_H);
  out += highlightRect(plan, scale, active, ELEV_H);
  const line = pts.map((p) => `${fmt(scale.x(p.position_m))},${fmt(y.x(p.elevation_m))}`);
  out += `<polyline class="elev-line" points="${line.join(" ")}"/>`;
  for (const seg of plan.segments) {
    const x = fmt(scale.x(seg.end_position_m));
    out += `<line class="seg-tick" x1="${x}" y1="0" x2="${x}" y2="${ELEV_H}"/>`;
  }
  out += eventMarkers(pts, scale, y);
  out += `<text class="ylab" x="4" y="14">${fmt(hi)} m</text>`;
  out += `<text class="ylab" x="4" y="${ELEV_H - 4}">${fmt(lo)} m</text>`;
  out += cursorLine(scale, cursor, ELEV_H);
  return out + "</svg>";
}

function eventMarkers(pts: RoutePoint[], scale: Scale, y: Scale): string {
  let out = "";
  for (const p of pts) {
    if (!p.event) continue;
    const cx = fmt(scale.x(p.position_m));
    const cy = fmt(y.x(p.elevation_m));
    const color = EVENT_COLORS[p.event] ?? "#666";
    out += `<circle class="ev ev-${p.event}" cx="${cx}" cy="${cy}" r="5" ` +
      `fill="${color}"><title>${p.event.replace("_", " ")}` +
      `${p.event_param != null ? ` (${p.event_param})` : ""}</title></circle>`;
  }
  return out;
}

export function renderVelocityLane(plan: PlanDoc, scale: Scale,
                                   cursor: number, active: number): string {
  const vmax = Math.max(
    ...plan.route.map((p) => p.speed_limit_kmh),
    ...plan.segments.map((s) => s.speed_limit_kmh)) * 1.08;
  const y = linearScale([0, vmax], [VEL_H - 6, 6]);

  let out = svgOpen("vel", VEL_H) + HATCH;
  out += highlightRect(plan, scale, active, VEL_H);
  for (const g of [25, 50, 75]) {
    if (g < vmax) {
      out += `<line class="grid" x1="${PAD_L}" y1="${fmt(y.x(g))}" ` +
        `x2="${LANE_W - PAD_R}" y2="${fmt(y.x(g))}"/>` +
        `<text class="ylab" x="4" y="${fmt(y.x(g) + 4)}">${g}</text>`;
    }
  }
  out += limitLine(plan.route, scale, y);
  for (const seg of plan.segments) {
    out += `<g data-seg="${seg.index}">`;
    if (seg.steps.length === 0) {
      out += noAdviceBlock(seg, scale, VEL_H);
    } else {
      const line = seg.steps.map(
        (s) => `${fmt(scale.x(s.position_m))},${fmt(y.x(s.velocity_kmh))}`);
      out += `<polyline class="vel-line" points="${line.join(" ")}"/>`;
      if (seg.brake_warning) {
        const x0 = scale.x(seg.start_position_m);
        const w = scale.x(seg.end_position_m) - x0;
        out += `<rect class="warn" x="${fmt(x0)}" y="0" width="${fmt(w)}" height="3"/>`;
      }
    }
    out += "</g>";
  }
  out += `<text class="ylab unit" x="4" y="14">km/h</text>`;
  out += cursorLine(scale, cursor, VEL_H);
  return out + "</svg>";
}

/** Posted limit as a step line; limits change exactly at route points. */
function limitLine(pts: RoutePoint[], scale: Scale, y: Scale): string {
  if (pts.length === 0) return "";
  let d = `M ${fmt(scale.x(pts[0].position_m))} ${fmt(y.x(pts[0].speed_limit_kmh))}`;
  for (let i = 1; i < pts.length; i++) {
    d += ` H ${fmt(scale.x(pts[i].position_m))}`;
    if (pts[i].speed_limit_kmh !== pts[i - 1].speed_limit_kmh) {
      d += ` V ${fmt(y.x(pts[i].speed_limit_kmh))}`;
    }
  }
  return `<path class="limit" d="${d}"/>`;
}

export function renderModeLane(plan: PlanDoc, scale: Scale,
                               cursor: number, active: number): string {
  let out = svgOpen("mode", MODE_H) + HATCH;
  out += highlightRect(plan, scale, active, MODE_H);
  for (const seg of plan.segments) {
    out += `<g data-seg="${seg.index}">`;
    out += seg.steps.length === 0
      ? noAdviceBlock(seg, scale, MODE_H)
      : modeRuns(seg, scale);
    out += "</g>";
  }
  out += cursorLine(scale, cursor, MODE_H);
  return out + "</svg>";
}

function modeRuns(seg: PlanSegment, scale: Scale): string {
  let out = "";
  const steps = seg.steps;
  let runStart = 0;
  for (let i = 1; i <= steps.length; i++) {
    const last = i === steps.length;
    if (!last && steps[i].mode === steps[runStart].mode
        && steps[i].gear === steps[runStart].gear) continue;
    const from = steps[runStart].position_m;
    const to = last ? seg.end_position_m : steps[i].position_m;
    const x0 = scale.x(from);
    const w = scale.x(to) - x0;
    const step = steps[runStart];
    const color = MODE_COLORS[step.mode] ?? "#999";
    out += `<rect class="run run-${step.mode}" x="${fmt(x0)}" y="6" ` +
      `width="${fmt(w)}" height="${MODE_H - 12}" fill="${color}">` +
      `<title>${step.mode.replace("_", " ")}, gear ${step.gear || "N"}</title></rect>`;
    if (w >= GEAR_LABEL_MIN_PX) {
      out += `<text class="gear" x="${fmt(x0 + w / 2)}" y="${MODE_H / 2 + 4}" ` +
        `text-anchor="middle">${step.gear > 0 ? step.gear : "N"}</text>`;
    }
    runStart = i;
  }
  return out;
}

export function renderAxis(routeLengthM: number, scale: Scale): string {
  let out = svgOpen("axis", AXIS_H);
  out += `<line class="axis-line" x1="${PAD_L}" y1="1" x2="${LANE_W - PAD_R}" y2="1"/>`;
  for (const t of ticks([0, routeLengthM], 10)) {
    const x = fmt(scale.x(t));
    out += `<line class="tick" x1="${x}" y1="1" x2="${x}" y2="7"/>`;
    out += `<text class="tlab" x="${x}" y="${AXIS_H - 5}" text-anchor="middle">${t} m</text>`;
  }
  return out + "</svg>";
}

/** The full lane stack for one plan revision. */
export function renderLanes(plan: PlanDoc, cursor: number, active: number): string {
  const scale = laneScale(plan.route_length_m);
  return `<div class="lane-stack">` +
    renderElevationLane(plan, scale, cursor, active) +
    renderVelocityLane(plan, scale, cursor, active) +
    renderModeLane(plan, scale, cursor, active) +
    renderAxis(plan.route_length_m, scale) +
    `</div>`;
}
