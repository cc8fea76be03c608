import { describe, expect, it } from "vitest";

import { MOVE_THROTTLE_MS, MoveThrottle, hitBeacon, pointerDown } from "../src/pointer.js";
import { Snapshot } from "../src/wire.js";
import { cmToPx, fitViewport } from "../src/viewport.js";

const vp = fitViewport(52, 47, 780, 705);

function snapWithBeacon(): Snapshot {
  return {
    type: "snapshot",
    seq: 1,
    phase: "running",
    t: 1.0,
    ee: { p: [0, 0], v: [0, 0] },
    beacons: [
      {
        id: 3,
        color: "orange",
        visibility: "stationary",
        pos_image: [324, 420],
        pos_real: [27, 35],
        t_vis: 0.97,
      },
    ],
  };
}

describe("pointer tools", () => {
  it("orange tool adds a beacon at the clicked cm position", () => {
    const out = pointerDown(vp, "orange", null, cmToPx(vp, [27, 35]));
    expect(out.shake).toBe(false);
    expect(out.command).toMatchObject({ type: "add_beacon", color: "orange" });
    const pos = (out.command as any).pos_cm;
    expect(pos[0]).toBeCloseTo(27, 6);
    expect(pos[1]).toBeCloseTo(35, 6);
  });

  it("clicks outside the workspace send nothing and request a shake", () => {
    const out = pointerDown(vp, "orange", null, [1, 1]);
    expect(out.command).toBeNull();
    expect(out.shake).toBe(true);
  });

  it("remove tool needs a beacon under the cursor", () => {
    const snap = snapWithBeacon();
    const hit = pointerDown(vp, "remove", snap, cmToPx(vp, [27.5, 35.2]));
    expect(hit.command).toEqual({ type: "remove_beacon", id: 3 });
    const miss = pointerDown(vp, "remove", snap, cmToPx(vp, [5, 5]));
    expect(miss.command).toBeNull();
  });

  it("move tool grabs the beacon instead of sending immediately", () => {
    const out = pointerDown(vp, "move", snapWithBeacon(), cmToPx(vp, [27, 35]));
    expect(out.command).toBeNull();
    expect(out.dragId).toBe(3);
  });

  it("ghost beacons cannot be hit", () => {
    const snap = snapWithBeacon();
    snap.beacons[0].visibility = "disappeared";
    expect(hitBeacon(snap, [27, 35])).toBeNull();
  });

  it("drag stream is throttled to 10 Hz", () => {
    const throttle = new MoveThrottle();
    const px = cmToPx(vp, [20, 20]);
    expect(throttle.maybeCommand(3, vp, px, 1000)).not.toBeNull();
    expect(throttle.maybeCommand(3, vp, px, 1000 + MOVE_THROTTLE_MS / 2)).toBeNull();
    expect(throttle.maybeCommand(3, vp, px, 1000 + MOVE_THROTTLE_MS)).not.toBeNull();
    expect(throttle.maybeCommand(null, vp, px, 5000)).toBeNull();
  });
});
