/** Display formatting. The service speaks km/h, m, kg and seconds;
 * minutes are the only conversion the UI performs. */

const trimZero = (s: string) => s.replace(/\.0$/, "");

export function fmtSpeed(kmh: number): string {
  return `${trimZero(kmh.toFixed(1))} km/h`;
}

export function fmtDistance(m: number): string {
  return `${Math.round(m)} m`;
}

export function fmtFuel(kg: number): string {
  return `${kg.toFixed(2)} kg`;
}

export function fmtMinutes(seconds: number): string {
  return `${trimZero((seconds / 60).toFixed(1))} min`;
}

export function clamp(x: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, x));
}
