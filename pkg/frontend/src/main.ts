/**
 * @fileoverview Page wiring: one store, one event stream, string renders.
 *
 * `?trip=<id>` attaches to an existing trip; otherwise a trip is created
 * from `?bundled=` (default valley), `?v0=` and `?step=` and the id is
 * pushed into the URL so a reload reattaches instead of re-planning.
 */

import { apiClient } from "./api.js";
import { laneScale, renderLanes } from "./lanes.js";
import { renderAdviceCard, renderNotice, renderSummary } from "./panels.js";
import { openEventStream } from "./sse.js";
import { Store } from "./store.js";

const api = apiClient("");
const store = new Store(api);

const el = (id: string) => document.getElementById(id) as HTMLElement;

function render(): void {
  const s = store.current;
  el("summary").innerHTML = renderSummary(s.plan, s.connected, s.recomputing);
  el("lanes").innerHTML = s.plan
    ? renderLanes(s.plan, s.cursor, store.activeSegmentIndex())
    : `<p class="loading">solving the route…</p>`;
  el("panel").innerHTML =
    renderNotice(s.notice) + renderAdviceCard(s.advice, s.plan, s.overrideBusy);
}

function wireInput(): void {
  el("lanes").addEventListener("click", (evt) => {
    const svg = (evt.target as Element).closest("svg.lane");
    const plan = store.current.plan;
    if (!svg || !plan) return;
    const x = evt.clientX - svg.getBoundingClientRect().left;
    void store.setCursor(laneScale(plan.route_length_m).invert(x));
  });

  window.addEventListener("keydown", (evt) => {
    if (evt.target instanceof HTMLInputElement) return;
    const stride = evt.shiftKey ? 100 : 20;
    if (evt.key === "ArrowRight") void store.moveCursor(stride);
    else if (evt.key === "ArrowLeft") void store.moveCursor(-stride);
    else if (evt.key.toLowerCase() === "f") void store.follow();
  });

  el("panel").addEventListener("click", (evt) => {
    if ((evt.target as Element).id === "follow") void store.follow();
  });

  el("panel").addEventListener("submit", (evt) => {
    evt.preventDefault();
    const input = document.getElementById("override-v") as HTMLInputElement | null;
    if (!input) return;
    const v = Number(input.value);
    if (Number.isFinite(v)) void store.override(v, "driver override");
  });
}

async function boot(): Promise<void> {
  const qs = new URLSearchParams(location.search);
  let tripId = qs.get("trip");
  if (!tripId) {
    const created = await api.createTrip({
      bundled: qs.get("bundled") ?? "valley",
      step_length_m: Number(qs.get("step") ?? "2"),
      ...(qs.get("v0") ? { initial_velocity_kmh: Number(qs.get("v0")) } : {}),
    });
    tripId = created.trip_id;
    qs.set("trip", tripId);
    history.replaceState(null, "", `?${qs}`);
  }
  store.attachTrip(tripId);
  await store.loadPlan();
  openEventStream({
    url: () => `/trips/${tripId}/events?revision=${store.current.revision}`,
    onEvent: (name, data) => void store.handleEvent(name, data),
    onStatus: (ok) => store.setConnected(ok),
  });
}

store.subscribe(render);
wireInput();
render();
boot().catch((err) => {
  el("panel").innerHTML = `<div class="notice" role="alert">${err}</div>`;
});
