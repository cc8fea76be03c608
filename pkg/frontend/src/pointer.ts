// Pointer-to-command translation for the beacon tools. Pure logic, no DOM:
// main.ts feeds it canvas-relative pixel positions.

import { Tool } from "./state.js";
import { ClientCommand, Snapshot } from "./wire.js";
import { Viewport, insideWorkspace, pxToCm } from "./viewport.js";

export const MOVE_THROTTLE_MS = 100; // move_beacon stream at 10 Hz
const HIT_RADIUS_CM = 4.0;

export function hitBeacon(snap: Snapshot | null, cm: [number, number]): number | null {
  if (!snap) return null;
  let best: number | null = null;
  let bestD = HIT_RADIUS_CM;
  for (const b of snap.beacons) {
    if (b.visibility === "disappeared") continue;
    const d = Math.hypot(b.pos_real[0] - cm[0], b.pos_real[1] - cm[1]);
    if (d < bestD) {
      best = b.id;
      bestD = d;
    }
  }
  return best;
}

export interface PointerOutcome {
  command: ClientCommand | null;
  shake: boolean; // click landed outside the workspace
  dragId: number | null; // beacon grabbed by the move tool
}

export function pointerDown(
  vp: Viewport,
  tool: Tool,
  snap: Snapshot | null,
  px: [number, number],
): PointerOutcome {
  const cm = pxToCm(vp, px);
  if (!insideWorkspace(vp, cm)) {
    return { command: null, shake: true, dragId: null };
  }
  if (tool === "orange" || tool === "green") {
    return { command: { type: "add_beacon", color: tool, pos_cm: cm }, shake: false, dragId: null };
  }
  const id = hitBeacon(snap, cm);
  if (id === null) {
    return { command: null, shake: false, dragId: null };
  }
  if (tool === "remove") {
    return { command: { type: "remove_beacon", id }, shake: false, dragId: null };
  }
  return { command: null, shake: false, dragId: id }; // move tool grabs, drag streams
}

export class MoveThrottle {
  private lastSent = -Infinity;

  maybeCommand(dragId: number | null, vp: Viewport, px: [number, number], now: number): ClientCommand | null {
    if (dragId === null) return null;
    if (now - this.lastSent < MOVE_THROTTLE_MS) return null;
    const cm = pxToCm(vp, px);
    if (!insideWorkspace(vp, cm)) return null;
    this.lastSent = now;
    return { type: "move_beacon", id: dragId, pos_cm: cm };
  }
}
