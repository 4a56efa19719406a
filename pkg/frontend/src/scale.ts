/** Linear distance-to-pixel mapping. Every lane is handed the same scale
 * instance, so their x axes stay aligned by construction. */

export interface Scale {
  domain: [number, number];
  range: [number, number];
  x(value: number): number;
  invert(px: number): number;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const k = (r1 - r0) / (d1 - d0 || 1);
  return {
    domain: [d0, d1],
    range: [r0, r1],
    x: (v) => r0 + (v - d0) * k,
    invert: (px) => d0 + (px - r0) / k,
  };
}

/** Round tick positions at a 1/2/5 step sized for roughly `count` ticks. */
export function ticks(domain: [number, number], count = 8): number[] {
  const span = domain[1] - domain[0];
  if (span <= 0) return [domain[0]];
  const raw = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm <= 1 ? 1 : norm <= 2 ? 2 : norm <= 5 ? 5 : 10) * mag;
  const out: number[] = [];
  for (let t = Math.ceil(domain[0] / step) * step; t <= domain[1] + 1e-9; t += step) {
    out.push(Math.round(t * 1e6) / 1e6);
  }
  return out;
}
