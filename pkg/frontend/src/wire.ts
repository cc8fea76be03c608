// Wire message codecs for the session WebSocket. The JSON shapes are pinned
// by the golden fixtures in ../wire_fixtures shared with the server tests.

export interface TrackSnapshot {
  id: number;
  color: "orange" | "green";
  visibility: "stationary" | "moving" | "disappeared";
  pos_image: [number, number];
  pos_real: [number, number];
  t_vis: number;
}

export interface Snapshot {
  type: "snapshot";
  seq: number;
  phase: "idle" | "running" | "finished";
  t: number;
  ee: { p: [number, number]; v: [number, number] };
  beacons: TrackSnapshot[];
  field?: number[];
  desirability?: [number, number][];
  winner?: number | null;
  status?: string | null;
}

export interface Reply {
  type: "ack" | "nack";
  cmd: string;
  reason?: string;
}

export type ServerMessage = Snapshot | Reply;

export type ClientCommand =
  | { type: "start"; controller: "neucf" | "poly"; seed: number }
  | { type: "reset" }
  | { type: "add_beacon"; color: "orange" | "green"; pos_cm: [number, number] }
  | { type: "remove_beacon"; id: number }
  | { type: "move_beacon"; id: number; pos_cm: [number, number] }
  | { type: "set_speed"; multiplier: number }
  | { type: "detail"; enabled: boolean };

function fail(why: string): never {
  throw new Error(`bad wire message: ${why}`);
}

function pair(v: unknown, what: string): [number, number] {
  if (!Array.isArray(v) || v.length !== 2 || typeof v[0] !== "number" || typeof v[1] !== "number") {
    fail(`${what} is not a number pair`);
  }
  return [v[0], v[1]];
}

function decodeTrack(raw: any): TrackSnapshot {
  if (typeof raw.id !== "number") fail("track id");
  if (raw.color !== "orange" && raw.color !== "green") fail("track color");
  if (!["stationary", "moving", "disappeared"].includes(raw.visibility)) fail("track visibility");
  return {
    id: raw.id,
    color: raw.color,
    visibility: raw.visibility,
    pos_image: pair(raw.pos_image, "pos_image"),
    pos_real: pair(raw.pos_real, "pos_real"),
    t_vis: raw.t_vis,
  };
}

export function decodeServerMessage(text: string): ServerMessage {
  const raw = JSON.parse(text);
  if (raw.type === "ack" || raw.type === "nack") {
    if (typeof raw.cmd !== "string") fail("reply without cmd");
    const reply: Reply = { type: raw.type, cmd: raw.cmd };
    if (raw.reason !== undefined) reply.reason = raw.reason;
    return reply;
  }
  if (raw.type !== "snapshot") fail(`unknown type ${raw.type}`);
  if (typeof raw.seq !== "number") fail("snapshot without seq");
  if (!["idle", "running", "finished"].includes(raw.phase)) fail("snapshot phase");
  const snap: Snapshot = {
    type: "snapshot",
    seq: raw.seq,
    phase: raw.phase,
    t: raw.t,
    ee: { p: pair(raw.ee.p, "ee.p"), v: pair(raw.ee.v, "ee.v") },
    beacons: (raw.beacons ?? []).map(decodeTrack),
  };
  if (raw.field !== undefined) {
    if (!Array.isArray(raw.field)) fail("field is not an array");
    snap.field = raw.field.map((x: unknown) => {
      if (typeof x !== "number") fail("field entry");
      return x;
    });
  }
  if (raw.desirability !== undefined) {
    snap.desirability = raw.desirability.map((e: unknown) => pair(e, "desirability entry"));
  }
  if (raw.winner !== undefined) snap.winner = raw.winner;
  if (raw.status !== undefined) snap.status = raw.status;
  return snap;
}

export function encodeServerMessage(msg: ServerMessage): string {
  return JSON.stringify(msg);
}

export function encodeCommand(cmd: ClientCommand): string {
  return JSON.stringify(cmd);
}

export function decodeCommand(text: string): ClientCommand {
  const raw = JSON.parse(text);
  switch (raw.type) {
    case "start":
      if (raw.controller !== "neucf" && raw.controller !== "poly") fail("start controller");
      return { type: "start", controller: raw.controller, seed: raw.seed ?? 0 };
    case "reset":
      return { type: "reset" };
    case "add_beacon":
      if (raw.color !== "orange" && raw.color !== "green") fail("add color");
      return { type: "add_beacon", color: raw.color, pos_cm: pair(raw.pos_cm, "pos_cm") };
    case "remove_beacon":
      return { type: "remove_beacon", id: raw.id };
    case "move_beacon":
      return { type: "move_beacon", id: raw.id, pos_cm: pair(raw.pos_cm, "pos_cm") };
    case "set_speed":
      return { type: "set_speed", multiplier: raw.multiplier };
    case "detail":
      return { type: "detail", enabled: !!raw.enabled };
    default:
      fail(`unknown command ${raw.type}`);
  }
}
