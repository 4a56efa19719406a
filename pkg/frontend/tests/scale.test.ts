import { describe, expect, it } from "vitest";
import { linearScale, ticks } from "../src/scale.js";

describe("linearScale", () => {
  const s = linearScale([0, 2000], [46, 946]);

  it("maps the domain ends onto the range", () => {
    expect(s.x(0)).toBe(46);
    expect(s.x(2000)).toBe(946);
    expect(s.x(1000)).toBeCloseTo(496, 9);
  });

  it("inverts back to metres", () => {
    for (const m of [0, 137.5, 1999]) {
      expect(s.invert(s.x(m))).toBeCloseTo(m, 9);
    }
  });

  it("degenerate domain stays finite", () => {
    const flat = linearScale([5, 5], [0, 100]);
    expect(Number.isFinite(flat.x(5))).toBe(true);
  });
});

describe("ticks", () => {
  it("picks 1/2/5 steps covering the domain", () => {
    expect(ticks([0, 1000], 10)).toEqual(
      [0, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000]);
    expect(ticks([0, 10000], 10)).toContain(5000);
  });

  it("starts at the first step inside the domain", () => {
    const t = ticks([120, 980], 8);
    expect(t[0]).toBeGreaterThanOrEqual(120);
    expect(t[t.length - 1]).toBeLessThanOrEqual(980);
  });
});
