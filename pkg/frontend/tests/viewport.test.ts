import { describe, expect, it } from "vitest";

import { cmToPx, fitViewport, insideWorkspace, pxToCm } from "../src/viewport.js";

describe("viewport mapping", () => {
  const vp = fitViewport(52, 47, 780, 705);

  it("round-trips cm -> px -> cm within half a pixel", () => {
    for (let x = 0; x <= 52; x += 3.37) {
      for (let y = 0; y <= 47; y += 2.91) {
        const px = cmToPx(vp, [x, y]);
        const back = pxToCm(vp, px);
        const errPx = Math.hypot((back[0] - x) * vp.scale, (back[1] - y) * vp.scale);
        expect(errPx).toBeLessThanOrEqual(0.5);
      }
    }
  });

  it("round-trips px -> cm -> px within half a pixel", () => {
    for (let x = 0; x <= 780; x += 37) {
      for (let y = 0; y <= 705; y += 29) {
        const cm = pxToCm(vp, [x, y]);
        const back = cmToPx(vp, cm);
        expect(Math.hypot(back[0] - x, back[1] - y)).toBeLessThanOrEqual(0.5);
      }
    }
  });

  it("keeps the full workspace on the canvas", () => {
    for (const corner of [[0, 0], [52, 0], [0, 47], [52, 47]] as [number, number][]) {
      const [x, y] = cmToPx(vp, corner);
      expect(x).toBeGreaterThanOrEqual(0);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThanOrEqual(780);
      expect(y).toBeLessThanOrEqual(705);
    }
  });

  it("flips the y axis (workspace up is screen up)", () => {
    const low = cmToPx(vp, [10, 0]);
    const high = cmToPx(vp, [10, 40]);
    expect(high[1]).toBeLessThan(low[1]);
  });

  it("bounds checks", () => {
    expect(insideWorkspace(vp, [26, 23])).toBe(true);
    expect(insideWorkspace(vp, [-1, 10])).toBe(false);
    expect(insideWorkspace(vp, [10, 48])).toBe(false);
  });
});
