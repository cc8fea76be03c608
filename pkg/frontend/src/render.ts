// Canvas drawing for the workspace view and the field heatmap.

import { HeatmapBuffer, heatColor, WINDOW_S } from "./heatmap.js";
import { PanelState } from "./state.js";
import { Snapshot, TrackSnapshot } from "./wire.js";
import { Viewport, cmToPx } from "./viewport.js";

const ORANGE = "#e8821e";
const GREEN = "#2faa44";
const BEACON_RADIUS_CM = 3.75;

function drawBeacon(ctx: CanvasRenderingContext2D, vp: Viewport, b: TrackSnapshot): void {
  const [x, y] = cmToPx(vp, b.pos_real);
  const r = BEACON_RADIUS_CM * vp.scale;
  ctx.save();
  if (b.visibility === "disappeared") ctx.globalAlpha = 0.25;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fillStyle = b.color === "orange" ? ORANGE : GREEN;
  ctx.fill();
  if (b.visibility === "moving") {
    ctx.strokeStyle = "#ffffff";
    ctx.setLineDash([4, 3]);
    ctx.lineWidth = 2;
    ctx.stroke();
  }
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#222";
  ctx.font = "11px sans-serif";
  ctx.textAlign = "center";
  const badge = b.visibility === "disappeared" ? "ghost" : b.visibility;
  ctx.fillText(`#${b.id} ${badge}`, x, y - r - 5);
  ctx.restore();
}

function drawDesirabilityRing(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  snap: Snapshot,
): void {
  if (!snap.desirability || snap.desirability.length === 0) return;
  const [cx, cy] = cmToPx(vp, snap.ee.p);
  const base = 14;
  const span = 36;
  ctx.save();
  ctx.lineWidth = 2;
  for (const [neuron, weight] of snap.desirability) {
    const rad = (neuron * Math.PI) / 180;
    const len = base + span * weight * 10;
    ctx.strokeStyle = neuron === snap.winner ? "#d42" : "rgba(60,60,200,0.55)";
    ctx.beginPath();
    ctx.moveTo(cx + base * Math.cos(rad), cy - base * Math.sin(rad));
    ctx.lineTo(cx + len * Math.cos(rad), cy - len * Math.sin(rad));
    ctx.stroke();
  }
  ctx.restore();
}

export function renderWorkspace(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  state: PanelState,
): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  const [x0, y0] = cmToPx(vp, [0, vp.heightCm]);
  ctx.fillStyle = "#f7f4ee";
  ctx.fillRect(x0, y0, vp.widthCm * vp.scale, vp.heightCm * vp.scale);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(x0, y0, vp.widthCm * vp.scale, vp.heightCm * vp.scale);

  const snap = state.snapshot;
  if (!snap) return;

  if (state.trail.length > 1) {
    ctx.beginPath();
    const [tx, ty] = cmToPx(vp, state.trail[0]);
    ctx.moveTo(tx, ty);
    for (const p of state.trail) {
      const [px, py] = cmToPx(vp, p);
      ctx.lineTo(px, py);
    }
    ctx.strokeStyle = "rgba(40,40,40,0.6)";
    ctx.lineWidth = 1.5;
    ctx.stroke();
  }

  for (const b of snap.beacons) drawBeacon(ctx, vp, b);
  drawDesirabilityRing(ctx, vp, snap);

  const [ex, ey] = cmToPx(vp, snap.ee.p);
  ctx.beginPath();
  ctx.arc(ex, ey, 6, 0, 2 * Math.PI);
  ctx.fillStyle = "#1a1a1a";
  ctx.fill();
}

export function renderHeatmap(
  ctx: CanvasRenderingContext2D,
  buffer: HeatmapBuffer,
): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = "#101020";
  ctx.fillRect(0, 0, width, height);
  const rows = buffer.rows;
  if (!rows.length) return;
  const tEnd = rows[rows.length - 1].t;
  const tStart = tEnd - WINDOW_S;
  const xOf = (t: number) => Math.floor(((t - tStart) / WINDOW_S) * (width - 1));
  const img = ctx.createImageData(width, height);
  for (let i = 0; i < rows.length; i++) {
    const row = rows[i];
    const x0 = Math.max(xOf(row.t), 0);
    const x1 = i + 1 < rows.length ? Math.max(xOf(rows[i + 1].t), x0 + 1) : x0 + 1;
    const n = row.values.length;
    for (let y = 0; y < height; y++) {
      // neuron 0 at the bottom
      const j = Math.min(Math.floor(((height - 1 - y) / (height - 1)) * (n - 1)), n - 1);
      const [r, g, b] = heatColor(row.values[j]);
      for (let x = x0; x < Math.min(x1, width); x++) {
        const o = (y * width + x) * 4;
        img.data[o] = r;
        img.data[o + 1] = g;
        img.data[o + 2] = b;
        img.data[o + 3] = 255;
      }
    }
  }
  ctx.putImageData(img, 0, 0);
}
