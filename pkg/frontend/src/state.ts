/**
 * Session view-state: a pure function of the local draft and the last
 * server messages. Draft operations return the next state together with
 * the single protocol message the action produces (or a warning and no
 * message when the edit is rejected); reducers never mutate their input.
 */

import { polylineSelfIntersects, wrapAngle } from "./geometry";
import type { ClientMessage, ServerMessage, StateUpdate, Vec2 } from "./protocol";

export const ROTATION_TICK = Math.PI / 180; // one degree per wheel tick
export const SCALE_TICK = 1.02; // two percent per wheel tick
export const SCALE_FLOOR = 0.01;
export const HISTORY_LIMIT = 600;

export type Connection = "connecting" | "open" | "closed";

export interface Draft {
  vertices: Vec2[];
  theta: number;
  scale: number;
  centroid: Vec2 | null;
}

export interface ErrorSample {
  t: number;
  segment: number;
  eF: number;
  eC: number;
}

export interface SessionView {
  connection: Connection;
  draft: Draft;
  preview: { shapes: Vec2[][]; modes: number[] } | null;
  snapshot: StateUpdate | null;
  history: ErrorSample[];
  executing: boolean;
  warning: string | null;
  log: string[];
}

export function createView(): SessionView {
  return {
    connection: "connecting",
    draft: { vertices: [], theta: 0, scale: 1, centroid: null },
    preview: null,
    snapshot: null,
    history: [],
    executing: false,
    warning: null,
    log: [],
  };
}

interface DraftResult {
  view: SessionView;
  message: ClientMessage | null;
}

function appendLog(log: string[], entry: string): string[] {
  const next = [...log, entry];
  return next.length > 200 ? next.slice(next.length - 200) : next;
}

// shape edits are locked while a plan executes; pose dials stay live and a
// new Commit cancels and replans
export function addVertex(view: SessionView, x: number, y: number): DraftResult {
  if (view.executing) {
    return {
      view: { ...view, warning: "shape locked during execution; Clear starts a new draft" },
      message: null,
    };
  }
  const candidate: Vec2[] = [...view.draft.vertices, [x, y]];
  const last = view.draft.vertices[view.draft.vertices.length - 1];
  if (last && Math.hypot(last[0] - x, last[1] - y) < 1e-9) {
    return { view: { ...view, warning: "duplicate vertex rejected" }, message: null };
  }
  if (polylineSelfIntersects(candidate)) {
    return { view: { ...view, warning: "vertex would self-intersect the outline" }, message: null };
  }
  return {
    view: {
      ...view,
      warning: null,
      draft: { ...view.draft, vertices: candidate },
      log: appendLog(view.log, `vertex (${x.toFixed(2)}, ${y.toFixed(2)})`),
    },
    message: { type: "AddVertex", x, y },
  };
}

export function clearShape(view: SessionView): DraftResult {
  return {
    view: {
      ...view,
      warning: null,
      draft: { ...view.draft, vertices: [] },
      log: appendLog(view.log, "shape cleared"),
    },
    message: { type: "ClearShape" },
  };
}

/** Rotation ticks from wheel or decoded wave gestures (shared path). */
export function adjustRotation(view: SessionView, ticks: number): DraftResult {
  const theta = wrapAngle(view.draft.theta + ticks * ROTATION_TICK);
  return {
    view: { ...view, draft: { ...view.draft, theta } },
    message: { type: "SetRotation", rad: theta },
  };
}

/** Scale ticks; multiplicative with a hard floor. */
export function adjustScale(view: SessionView, ticks: number): DraftResult {
  const scale = Math.max(view.draft.scale * Math.pow(SCALE_TICK, ticks), SCALE_FLOOR);
  return {
    view: { ...view, draft: { ...view.draft, scale } },
    message: { type: "SetScale", s: scale },
  };
}

export function setCentroid(view: SessionView, x: number, y: number): DraftResult {
  return {
    view: {
      ...view,
      draft: { ...view.draft, centroid: [x, y] },
      log: appendLog(view.log, `centroid (${x.toFixed(2)}, ${y.toFixed(2)})`),
    },
    message: { type: "SetCentroid", x, y },
  };
}

export function commit(view: SessionView): DraftResult {
  if (view.draft.vertices.length < 3) {
    return { view: { ...view, warning: "draw at least 3 vertices first" }, message: null };
  }
  return {
    view: { ...view, warning: null, log: appendLog(view.log, "committed") },
    message: { type: "Commit" },
  };
}

export function setConnection(view: SessionView, connection: Connection): SessionView {
  return { ...view, connection };
}

export function applyServer(view: SessionView, message: ServerMessage): SessionView {
  switch (message.type) {
    case "Ack":
      return view;
    case "PlanPreview":
      return {
        ...view,
        preview: { shapes: message.shapes, modes: message.modes },
        executing: true,
        history: [],
        log: appendLog(view.log, `plan preview: ${message.shapes.length} shapes`),
      };
    case "StateUpdate": {
      const sample = {
        t: message.t,
        segment: message.segment,
        eF: message.e_f,
        eC: message.e_c,
      };
      const history = [...view.history, sample];
      if (history.length > HISTORY_LIMIT) history.shift();
      return { ...view, snapshot: message, history, executing: true };
    }
    case "Done":
      return { ...view, executing: false, log: appendLog(view.log, "execution done") };
    case "Error":
      return { ...view, warning: message.msg, log: appendLog(view.log, `error: ${message.msg}`) };
    default:
      return view;
  }
}
