/** World-to-screen mapping that auto-fits a point cloud with a margin. */

import type { Vec2 } from "./protocol";

export interface Viewport {
  scale: number; // pixels per world unit
  cx: number; // world center mapped to the canvas center
  cy: number;
  width: number;
  height: number;
}

export function fitViewport(
  points: Vec2[],
  width: number,
  height: number,
  margin = 0.1,
): Viewport {
  if (points.length === 0) {
    return { scale: 40, cx: 0, cy: 0, width, height };
  }
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const [x, y] of points) {
    xMin = Math.min(xMin, x);
    xMax = Math.max(xMax, x);
    yMin = Math.min(yMin, y);
    yMax = Math.max(yMax, y);
  }
  const spanX = Math.max(xMax - xMin, 1e-6);
  const spanY = Math.max(yMax - yMin, 1e-6);
  const usable = 1 - 2 * margin;
  const scale = Math.min((width * usable) / spanX, (height * usable) / spanY);
  return {
    scale,
    cx: (xMin + xMax) / 2,
    cy: (yMin + yMax) / 2,
    width,
    height,
  };
}

export function worldToScreen(vp: Viewport, p: Vec2): Vec2 {
  return [
    vp.width / 2 + (p[0] - vp.cx) * vp.scale,
    vp.height / 2 - (p[1] - vp.cy) * vp.scale, // canvas y grows downward
  ];
}

export function screenToWorld(vp: Viewport, p: Vec2): Vec2 {
  return [
    vp.cx + (p[0] - vp.width / 2) / vp.scale,
    vp.cy - (p[1] - vp.height / 2) / vp.scale,
  ];
}
