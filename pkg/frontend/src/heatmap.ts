// Rolling field-activity heatmap buffer (time x neuron index) plus its color
// scale. The window is fixed at 60 s; the color range is pinned to
// [resting level, threshold + 1] so threshold crossings stand out.

export const WINDOW_S = 60;
export const COLOR_LO = -1.0; // field resting level
export const COLOR_HI = 1.5; // initiation threshold + 1

export interface HeatRow {
  t: number;
  values: number[];
}

export class HeatmapBuffer {
  rows: HeatRow[] = [];

  push(t: number, values: number[]): void {
    const last = this.rows[this.rows.length - 1];
    if (last && t < last.t) this.rows = []; // new run restarted the clock
    this.rows.push({ t, values });
    const cutoff = t - WINDOW_S;
    while (this.rows.length && this.rows[0].t < cutoff) this.rows.shift();
  }

  clear(): void {
    this.rows = [];
  }
}

// dark blue -> teal -> yellow -> red ramp, clamped to the fixed range
export function heatColor(u: number): [number, number, number] {
  const x = Math.min(Math.max((u - COLOR_LO) / (COLOR_HI - COLOR_LO), 0), 1);
  const stops: [number, number, number][] = [
    [12, 16, 70],
    [20, 120, 140],
    [235, 210, 60],
    [205, 40, 30],
  ];
  const pos = x * (stops.length - 1);
  const i = Math.min(Math.floor(pos), stops.length - 2);
  const f = pos - i;
  const a = stops[i];
  const b = stops[i + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}
