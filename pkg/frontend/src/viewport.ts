// Workspace-to-screen mapping. Workspace y points up, canvas y points down.

export interface Viewport {
  widthCm: number;
  heightCm: number;
  scale: number; // px per cm
  marginX: number;
  marginY: number;
}

export function fitViewport(
  widthCm: number,
  heightCm: number,
  canvasW: number,
  canvasH: number,
  margin = 20,
): Viewport {
  const scale = Math.min((canvasW - 2 * margin) / widthCm, (canvasH - 2 * margin) / heightCm);
  const marginX = (canvasW - scale * widthCm) / 2;
  const marginY = (canvasH - scale * heightCm) / 2;
  return { widthCm, heightCm, scale, marginX, marginY };
}

export function cmToPx(vp: Viewport, pos: [number, number]): [number, number] {
  return [vp.marginX + pos[0] * vp.scale, vp.marginY + (vp.heightCm - pos[1]) * vp.scale];
}

export function pxToCm(vp: Viewport, px: [number, number]): [number, number] {
  return [(px[0] - vp.marginX) / vp.scale, vp.heightCm - (px[1] - vp.marginY) / vp.scale];
}

export function insideWorkspace(vp: Viewport, cm: [number, number]): boolean {
  return cm[0] >= 0 && cm[0] <= vp.widthCm && cm[1] >= 0 && cm[1] <= vp.heightCm;
}
