import { describe, expect, it } from "vitest";
import {
  LANE_W, laneScale, renderAxis, renderElevationLane, renderLanes,
  renderModeLane, renderVelocityLane,
} from "../src/lanes.js";
import { mkPlan, mkSegment, mkStep, segGroup } from "./fixtures.js";

const plan = mkPlan();
const scale = laneScale(plan.route_length_m);

describe("lane alignment", () => {
  it("all lanes place the 600 m boundary at the same x", () => {
    const x = String(Math.round(scale.x(600) * 100) / 100);
    const elev = renderElevationLane(plan, scale, 0, 0);
    const vel = renderVelocityLane(plan, scale, 0, 0);
    const mode = renderModeLane(plan, scale, 0, 0);
    expect(elev).toContain(`x1="${x}"`); // segment tick
    expect(segGroup(vel, 1)).toContain(`x="${x}"`); // gap block start
    expect(segGroup(mode, 1)).toContain(`x="${x}"`);
  });

  it("the stack shares one width and one axis", () => {
    const html = renderLanes(plan, 250, 0);
    expect(html.match(/<svg /g)).toHaveLength(4);
    expect(html.match(new RegExp(`width="${LANE_W}"`, "g"))).toHaveLength(4);
  });
});

describe("velocity lane", () => {
  const vel = renderVelocityLane(plan, scale, 0, 0);

  it("advised segments draw one point per plan step", () => {
    const g0 = segGroup(vel, 0);
    const points = g0.match(/<polyline[^>]*points="([^"]+)"/)![1];
    expect(points.split(" ")).toHaveLength(plan.segments[0].steps.length);
  });

  it("the no-advice gap is hatched and labeled, with no profile line", () => {
    const g1 = segGroup(vel, 1);
    expect(g1).toContain("url(#hatch)");
    expect(g1).toContain("no advice");
    expect(g1).not.toContain("<polyline");
  });

  it("the posted limit drops as a step at 600 m", () => {
    const d = vel.match(/<path class="limit" d="([^"]+)"/)![1];
    expect(d).toContain("V"); // vertical jump where the limit changes
  });

  it("a brake warning marks the segment", () => {
    const warmPlan = mkPlan();
    warmPlan.segments[0] = { ...warmPlan.segments[0], brake_warning: true };
    const g0 = segGroup(renderVelocityLane(warmPlan, scale, 0, 0), 0);
    expect(g0).toContain('class="warn"');
  });
});

describe("mode lane", () => {
  it("merges consecutive steps with the same mode and gear into runs", () => {
    const g0 = segGroup(renderModeLane(plan, scale, 0, 0), 0);
    // cruising x3, eco_roll x2, engine_braking x1 -> three rects
    expect(g0.match(/<rect class="run/g)).toHaveLength(3);
    expect(g0).toContain(">N</text>"); // neutral label for the eco-roll run
  });

  it("hatches the no-advice gap", () => {
    const g1 = segGroup(renderModeLane(plan, scale, 0, 0), 1);
    expect(g1).toContain("url(#hatch)");
  });
});

describe("overlays stay out of segment groups", () => {
  it("cursor and highlight never change a segment fragment", () => {
    for (const render of [renderVelocityLane, renderModeLane]) {
      const a = render(plan, scale, 120, 0);
      const b = render(plan, scale, 880, 1);
      expect(segGroup(a, 0)).toBe(segGroup(b, 0));
      expect(segGroup(a, 1)).toBe(segGroup(b, 1));
      expect(a).not.toBe(b); // the overlays themselves did move
    }
  });

  it("elevation lane draws events and moves only its cursor", () => {
    const a = renderElevationLane(plan, scale, 120, 0);
    expect(a).toContain("ev-red_light");
    expect(a).toContain("ev-destination");
    const b = renderElevationLane(plan, scale, 700, 0);
    expect(a.replace(/<line class="cursor[^/]*\/>/, ""))
      .toBe(b.replace(/<line class="cursor[^/]*\/>/, ""));
  });
});

describe("axis", () => {
  it("labels distances in metres", () => {
    const axis = renderAxis(1000, scale);
    expect(axis).toContain(">0 m</text>");
    expect(axis).toContain(">1000 m</text>");
  });
});

describe("single advised segment", () => {
  it("renders without a gap block", () => {
    const solo = mkPlan({
      segments: [mkSegment(0, 0, 1000, {
        steps: [mkStep(0, 70), mkStep(500, 70), mkStep(990, 70)],
        terminating_event: "destination",
      })],
      incomplete: false,
    });
    const vel = renderVelocityLane(solo, laneScale(1000), 0, 0);
    expect(vel).not.toContain("no advice");
  });
});
