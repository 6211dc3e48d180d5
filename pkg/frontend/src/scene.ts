/**
 * Scene construction: turns a session view into plain draw primitives.
 * Pure and side-effect free, so rendering invariants are unit-testable;
 * the canvas painter consumes the result without touching session data.
 */

import type { Vec2 } from "./protocol";
import type { SessionView } from "./state";
import { fitViewport, worldToScreen, type Viewport } from "./viewport";

export interface Scene {
  viewport: Viewport;
  agents: Vec2[]; // screen-space agent marker centers
  draftOutline: Vec2[];
  draftCentroid: Vec2 | null;
  ghosts: Vec2[][]; // world-placed intermediate shapes, mapped to screen
  modeBadge: string;
  segmentBadge: string;
  thetaDisplay: string;
  scaleDisplay: string;
  sparklineF: number[];
  sparklineC: number[];
  warning: string | null;
  connection: string;
}

/** World-space footprint the viewport must cover: swarm, draft and plan. */
export function worldExtent(view: SessionView): Vec2[] {
  const points: Vec2[] = [];
  if (view.snapshot) points.push(...view.snapshot.positions);
  points.push(...view.draft.vertices);
  if (view.draft.centroid) points.push(view.draft.centroid);
  if (view.preview) {
    for (const shape of view.preview.shapes) points.push(...shape);
  }
  return points;
}

export function buildScene(view: SessionView, width: number, height: number): Scene {
  const viewport = fitViewport(worldExtent(view), width, height);
  const toScreen = (p: Vec2) => worldToScreen(viewport, p);
  return {
    viewport,
    agents: view.snapshot ? view.snapshot.positions.map(toScreen) : [],
    draftOutline: view.draft.vertices.map(toScreen),
    draftCentroid: view.draft.centroid ? toScreen(view.draft.centroid) : null,
    ghosts: view.preview ? view.preview.shapes.map((s) => s.map(toScreen)) : [],
    modeBadge: view.snapshot ? `mode ${view.snapshot.mode}` : "idle",
    segmentBadge: view.snapshot ? `segment ${view.snapshot.segment}` : "",
    thetaDisplay: `${((view.draft.theta * 180) / Math.PI).toFixed(1)} deg`,
    scaleDisplay: `x${view.draft.scale.toFixed(2)}`,
    sparklineF: view.history.map((h) => h.eF),
    sparklineC: view.history.map((h) => h.eC),
    warning: view.warning,
    connection: view.connection,
  };
}

/** Log-scaled polyline for an error history, normalized to a pixel box. */
export function sparklinePath(values: number[], width: number, height: number): Vec2[] {
  if (values.length === 0) return [];
  const floor = 1e-9;
  const logs = values.map((v) => Math.log10(Math.max(v, floor)));
  const lo = Math.min(...logs);
  const hi = Math.max(...logs);
  const span = Math.max(hi - lo, 1e-6);
  return logs.map((v, i) => [
    (i / Math.max(values.length - 1, 1)) * width,
    height - ((v - lo) / span) * height,
  ]);
}
