/**
 * Session protocol over a WebSocket: newline-delimited JSON frames.
 * Mirrors the server's message vocabulary; numbers are plain 64-bit floats.
 */

export type Vec2 = [number, number];

export type ClientMessage =
  | { type: "AddVertex"; x: number; y: number }
  | { type: "ClearShape" }
  | { type: "SetRotation"; rad: number }
  | { type: "SetScale"; s: number }
  | { type: "SetCentroid"; x: number; y: number }
  | { type: "Commit" }
  | {
      type: "PointerEvent";
      kind: "move" | "left_click" | "right_click" | "scroll_up" | "scroll_down" | "none";
      x: number;
      y: number;
    };

export interface Ack {
  type: "Ack";
  of: string;
}

export interface PlanPreview {
  type: "PlanPreview";
  shapes: Vec2[][];
  modes: number[];
}

export interface StateUpdate {
  type: "StateUpdate";
  t: number;
  positions: Vec2[];
  e_f: number;
  e_c: number;
  segment: number;
  mode: number;
}

export interface Done {
  type: "Done";
}

export interface ErrorMessage {
  type: "Error";
  msg: string;
}

export type ServerMessage = Ack | PlanPreview | StateUpdate | Done | ErrorMessage;

const SERVER_TYPES = new Set(["Ack", "PlanPreview", "StateUpdate", "Done", "Error"]);

export function encodeMessage(message: ClientMessage): string {
  return JSON.stringify(message) + "\n";
}

/**
 * Consume complete newline-terminated frames from a buffer; anything after
 * the last newline is returned as the remainder for the next read.
 */
export function parseServerBuffer(buffer: string): {
  messages: ServerMessage[];
  rest: string;
} {
  const lastNewline = buffer.lastIndexOf("\n");
  if (lastNewline < 0) {
    return { messages: [], rest: buffer };
  }
  const complete = buffer.slice(0, lastNewline);
  const rest = buffer.slice(lastNewline + 1);
  const messages: ServerMessage[] = [];
  for (const line of complete.split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    let parsed: unknown;
    try {
      parsed = JSON.parse(trimmed);
    } catch {
      continue; // a malformed server frame is dropped, not fatal
    }
    if (isServerMessage(parsed)) {
      messages.push(parsed);
    }
  }
  return { messages, rest };
}

export function isServerMessage(value: unknown): value is ServerMessage {
  return (
    typeof value === "object" &&
    value !== null &&
    "type" in value &&
    SERVER_TYPES.has((value as { type: unknown }).type as string)
  );
}
