/**
 * WebSocket client with newline framing and automatic reconnect.
 * Incoming text accumulates in a buffer; only complete lines are parsed.
 */

import { encodeMessage, parseServerBuffer } from "./protocol";
import type { ClientMessage, ServerMessage } from "./protocol";

export interface SessionSocketHandlers {
  onMessage: (message: ServerMessage) => void;
  onConnection: (state: "connecting" | "open" | "closed") => void;
}

export class SessionSocket {
  private socket: WebSocket | null = null;
  private buffer = "";
  private retryMs = 500;
  private closedByUser = false;

  constructor(
    private readonly url: string,
    private readonly handlers: SessionSocketHandlers,
  ) {
    this.connect();
  }

  private connect() {
    this.handlers.onConnection("connecting");
    this.socket = new WebSocket(this.url);
    this.socket.onopen = () => {
      this.retryMs = 500;
      this.handlers.onConnection("open");
    };
    this.socket.onmessage = (event) => {
      this.buffer += String(event.data);
      const { messages, rest } = parseServerBuffer(this.buffer);
      this.buffer = rest;
      for (const message of messages) this.handlers.onMessage(message);
    };
    this.socket.onclose = () => {
      this.handlers.onConnection("closed");
      if (!this.closedByUser) {
        setTimeout(() => this.connect(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 8000);
      }
    };
    this.socket.onerror = () => this.socket?.close();
  }

  send(message: ClientMessage): boolean {
    if (!this.socket || this.socket.readyState !== WebSocket.OPEN) {
      return false;
    }
    this.socket.send(encodeMessage(message));
    return true;
  }

  close() {
    this.closedByUser = true;
    this.socket?.close();
  }
}
