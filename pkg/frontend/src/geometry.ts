/** Small planar helpers shared by the draft editor and the renderer. */

import type { Vec2 } from "./protocol";

function orient(a: Vec2, b: Vec2, c: Vec2): number {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

function onSegment(a: Vec2, b: Vec2, p: Vec2, eps: number): boolean {
  return (
    Math.min(a[0], b[0]) - eps <= p[0] &&
    p[0] <= Math.max(a[0], b[0]) + eps &&
    Math.min(a[1], b[1]) - eps <= p[1] &&
    p[1] <= Math.max(a[1], b[1]) + eps
  );
}

export function segmentsIntersect(p1: Vec2, p2: Vec2, p3: Vec2, p4: Vec2, eps = 1e-12): boolean {
  const d1 = orient(p3, p4, p1);
  const d2 = orient(p3, p4, p2);
  const d3 = orient(p1, p2, p3);
  const d4 = orient(p1, p2, p4);
  if (
    ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
    ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
  ) {
    return true;
  }
  if (Math.abs(d1) <= eps && onSegment(p3, p4, p1, eps)) return true;
  if (Math.abs(d2) <= eps && onSegment(p3, p4, p2, eps)) return true;
  if (Math.abs(d3) <= eps && onSegment(p1, p2, p3, eps)) return true;
  if (Math.abs(d4) <= eps && onSegment(p1, p2, p4, eps)) return true;
  return false;
}

/** Non-adjacent edge crossing test over an open vertex chain. */
export function polylineSelfIntersects(points: Vec2[]): boolean {
  const n = points.length;
  if (n < 4) return false;
  let scale = 1;
  for (const p of points) {
    scale = Math.max(scale, Math.abs(p[0]), Math.abs(p[1]));
  }
  const eps = 1e-12 * scale * scale;
  for (let i = 0; i + 1 < n; i++) {
    for (let j = i + 2; j + 1 < n; j++) {
      if (segmentsIntersect(points[i], points[i + 1], points[j], points[j + 1], eps)) {
        return true;
      }
    }
  }
  return false;
}

export function wrapAngle(theta: number): number {
  let wrapped = ((theta + Math.PI) % (2 * Math.PI)) - Math.PI;
  if (wrapped <= -Math.PI) wrapped += 2 * Math.PI;
  return wrapped;
}
