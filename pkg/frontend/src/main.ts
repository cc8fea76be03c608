// Panel bootstrap: session setup, socket wiring, pointer tools, controls.

import { HeatmapBuffer } from "./heatmap.js";
import { MoveThrottle, pointerDown } from "./pointer.js";
import { renderHeatmap, renderWorkspace } from "./render.js";
import { PanelState, Tool, expireToasts, initialState, reduce } from "./state.js";
import { ClientCommand, decodeServerMessage, encodeCommand } from "./wire.js";
import { fitViewport } from "./viewport.js";

const workspaceCanvas = document.getElementById("workspace") as HTMLCanvasElement;
const heatmapCanvas = document.getElementById("heatmap") as HTMLCanvasElement;
const statusLine = document.getElementById("status") as HTMLElement;
const toastBox = document.getElementById("toasts") as HTMLElement;

let state: PanelState = initialState();
const heat = new HeatmapBuffer();
const throttle = new MoveThrottle();
let dragId: number | null = null;
let socket: WebSocket | null = null;
let viewport = fitViewport(52, 47, workspaceCanvas.width, workspaceCanvas.height);

function send(cmd: ClientCommand): void {
  if (socket && socket.readyState === WebSocket.OPEN) {
    socket.send(encodeCommand(cmd));
  }
}

function shake(): void {
  workspaceCanvas.classList.remove("shake");
  void workspaceCanvas.offsetWidth; // restart the animation
  workspaceCanvas.classList.add("shake");
}

async function connect(): Promise<void> {
  const resp = await fetch("/session", { method: "POST" });
  const { id } = await resp.json();
  const proto = location.protocol === "https:" ? "wss" : "ws";
  socket = new WebSocket(`${proto}://${location.host}/ws/session/${id}`);
  socket.addEventListener("open", () => {
    state = { ...state, connection: "open" };
  });
  socket.addEventListener("close", () => {
    state = { ...state, connection: "closed" };
  });
  socket.addEventListener("message", (ev) => {
    const msg = decodeServerMessage(ev.data as string);
    state = reduce(state, msg, performance.now());
    if (msg.type === "snapshot" && msg.field && msg.phase !== "idle") {
      heat.push(msg.t, msg.field);
    }
    if (msg.type === "snapshot" && msg.phase === "idle") {
      heat.clear();
    }
  });
}

function setupTools(): void {
  for (const tool of ["orange", "green", "remove", "move"] as Tool[]) {
    const btn = document.getElementById(`tool-${tool}`) as HTMLButtonElement;
    btn.addEventListener("click", () => {
      state = { ...state, tool };
      document.querySelectorAll(".tool").forEach((el) => el.classList.remove("active"));
      btn.classList.add("active");
    });
  }

  workspaceCanvas.addEventListener("pointerdown", (ev) => {
    const rect = workspaceCanvas.getBoundingClientRect();
    const px: [number, number] = [ev.clientX - rect.left, ev.clientY - rect.top];
    const out = pointerDown(viewport, state.tool, state.snapshot, px);
    if (out.shake) shake();
    if (out.command) send(out.command);
    dragId = out.dragId;
  });
  workspaceCanvas.addEventListener("pointermove", (ev) => {
    if (dragId === null) return;
    const rect = workspaceCanvas.getBoundingClientRect();
    const cmd = throttle.maybeCommand(
      dragId,
      viewport,
      [ev.clientX - rect.left, ev.clientY - rect.top],
      performance.now(),
    );
    if (cmd) send(cmd);
  });
  const drop = () => {
    dragId = null;
  };
  workspaceCanvas.addEventListener("pointerup", drop);
  workspaceCanvas.addEventListener("pointerleave", drop);
}

function setupControls(): void {
  const controller = document.getElementById("controller") as HTMLSelectElement;
  const seed = document.getElementById("seed") as HTMLInputElement;
  (document.getElementById("start") as HTMLButtonElement).addEventListener("click", () => {
    send({ type: "start", controller: controller.value as "neucf" | "poly", seed: Number(seed.value) || 0 });
    heat.clear();
  });
  (document.getElementById("reset") as HTMLButtonElement).addEventListener("click", () => {
    send({ type: "reset" });
    heat.clear();
  });
  const speed = document.getElementById("speed") as HTMLInputElement;
  speed.addEventListener("change", () => {
    send({ type: "set_speed", multiplier: Number(speed.value) });
    (document.getElementById("speed-label") as HTMLElement).textContent = `${speed.value}x`;
  });
  (document.getElementById("download") as HTMLButtonElement).addEventListener("click", async () => {
    const sid = socket?.url.split("/").pop();
    const resp = await fetch(`/session/${sid}/record`);
    if (!resp.ok) {
      state = reduce(state, { type: "nack", cmd: "download", reason: await resp.text() }, performance.now());
      return;
    }
    const blob = new Blob([await resp.text()], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "recorded.scenario.json";
    a.click();
    URL.revokeObjectURL(a.href);
  });
}

function frame(): void {
  state = expireToasts(state, performance.now());
  const snap = state.snapshot;
  renderWorkspace(workspaceCanvas.getContext("2d")!, viewport, state);
  renderHeatmap(heatmapCanvas.getContext("2d")!, heat);
  const phase = snap ? snap.phase : "-";
  const t = snap ? snap.t.toFixed(2) : "0.00";
  const winner = snap && snap.winner != null ? `winner ${snap.winner}°` : "no winner";
  let line = `${state.connection} | phase ${phase} | t=${t}s | ${winner}`;
  if (snap && snap.phase === "finished") {
    line += ` | ${snap.status ?? "done"}; reset to go again`;
  }
  statusLine.textContent = line;
  toastBox.innerHTML = "";
  for (const toast of state.toasts) {
    const div = document.createElement("div");
    div.className = "toast";
    div.textContent = toast.text;
    toastBox.appendChild(div);
  }
  requestAnimationFrame(frame);
}

setupTools();
setupControls();
connect();
requestAnimationFrame(frame);
