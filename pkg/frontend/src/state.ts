// Panel state and its reducer: one place where socket messages mutate state.
// Stale snapshots (seq not above the last rendered one) are dropped here.

import { ServerMessage, Snapshot } from "./wire.js";

export type Tool = "orange" | "green" | "remove" | "move";

export interface Toast {
  text: string;
  at: number; // ms timestamp, for expiry
}

export interface PanelState {
  connection: "connecting" | "open" | "closed";
  snapshot: Snapshot | null;
  lastSeq: number;
  trail: [number, number][];
  tool: Tool;
  toasts: Toast[];
}

export const TRAIL_LIMIT = 4000;

export function initialState(): PanelState {
  return {
    connection: "connecting",
    snapshot: null,
    lastSeq: -1,
    trail: [],
    tool: "orange",
    toasts: [],
  };
}

export function reduce(state: PanelState, msg: ServerMessage, now = 0): PanelState {
  if (msg.type !== "snapshot") {
    if (msg.type === "nack") {
      const toast = { text: `${msg.cmd}: ${msg.reason ?? "rejected"}`, at: now };
      return { ...state, toasts: [...state.toasts.slice(-4), toast] };
    }
    return state;
  }
  if (msg.seq <= state.lastSeq) {
    return state; // stale or duplicate snapshot
  }
  let trail = state.trail;
  const prev = state.snapshot;
  if (msg.phase === "idle" || (prev && msg.t < prev.t)) {
    trail = []; // fresh run
  }
  if (msg.phase === "running" || msg.phase === "finished") {
    trail = [...trail, msg.ee.p];
    if (trail.length > TRAIL_LIMIT) trail = trail.slice(trail.length - TRAIL_LIMIT);
  }
  return { ...state, snapshot: msg, lastSeq: msg.seq, trail };
}

export function expireToasts(state: PanelState, now: number, ttlMs = 4000): PanelState {
  const toasts = state.toasts.filter((t) => now - t.at < ttlMs);
  return toasts.length === state.toasts.length ? state : { ...state, toasts };
}
