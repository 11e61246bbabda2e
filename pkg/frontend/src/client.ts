/**
 * Reconnecting websocket client for the console backend.
 *
 * Owns a ConsoleState (see store.ts) and notifies subscribers on every
 * change. The socket implementation is injectable so tests can drive the
 * client with fake sockets or node's `ws` package; the browser default is
 * the native WebSocket.
 */

import { Command, encodeCommand, parseServerMessage } from "./protocol.js";
import {
  ConsoleState,
  ConnectionStatus,
  apply,
  initialState,
  setConnection,
} from "./store.js";

/** The subset of the WHATWG WebSocket surface the client needs. */
export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export interface ConsoleClientOptions {
  /** socket factory; defaults to the browser's native WebSocket */
  makeSocket?: (url: string) => SocketLike;
  /** reconnect delay per attempt (ms); defaults to exponential backoff */
  backoffMs?: (attempt: number) => number;
  /** cap on reconnect attempts; Infinity by default */
  maxAttempts?: number;
}

export function defaultBackoffMs(attempt: number): number {
  // 500 ms, 1 s, 2 s, ... capped at 10 s
  return Math.min(500 * 2 ** attempt, 10_000);
}

export class ConsoleClient {
  private state: ConsoleState = initialState();
  private socket: SocketLike | null = null;
  private listeners = new Set<(state: ConsoleState) => void>();
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private attempt = 0;
  private stopped = false;

  private readonly makeSocket: (url: string) => SocketLike;
  private readonly backoffMs: (attempt: number) => number;
  private readonly maxAttempts: number;

  constructor(
    private readonly url: string,
    options: ConsoleClientOptions = {},
  ) {
    this.makeSocket =
      options.makeSocket ??
      ((u) => new WebSocket(u) as unknown as SocketLike);
    this.backoffMs = options.backoffMs ?? defaultBackoffMs;
    this.maxAttempts = options.maxAttempts ?? Infinity;
  }

  getState(): ConsoleState {
    return this.state;
  }

  subscribe(listener: (state: ConsoleState) => void): () => void {
    this.listeners.add(listener);
    listener(this.state);
    return () => this.listeners.delete(listener);
  }

  connect(): void {
    if (this.stopped) return;
    this.setStatus("connecting");
    let socket: SocketLike;
    try {
      socket = this.makeSocket(this.url);
    } catch {
      this.scheduleReconnect();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.attempt = 0;
      this.setStatus("open");
    };
    socket.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg !== null) this.setState(apply(this.state, msg));
    };
    socket.onerror = () => {
      // the close handler owns reconnection; nothing to do here
    };
    socket.onclose = () => {
      if (this.socket !== socket) return; // superseded by a newer socket
      this.socket = null;
      this.setStatus("closed");
      this.scheduleReconnect();
    };
  }

  /** Send a command; returns false when the socket is not open. */
  send(command: Command): boolean {
    if (this.socket === null || this.state.connection !== "open") return false;
    try {
      this.socket.send(encodeCommand(command));
      return true;
    } catch {
      return false;
    }
  }

  close(): void {
    this.stopped = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    const socket = this.socket;
    this.socket = null;
    if (socket !== null) {
      socket.onclose = null;
      socket.close();
    }
    this.setStatus("closed");
  }

  private scheduleReconnect(): void {
    if (this.stopped || this.reconnectTimer !== null) return;
    if (this.attempt >= this.maxAttempts) return;
    const delay = this.backoffMs(this.attempt);
    this.attempt += 1;
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      this.connect();
    }, delay);
  }

  private setStatus(status: ConnectionStatus): void {
    this.setState(setConnection(this.state, status));
  }

  private setState(next: ConsoleState): void {
    if (next === this.state) return;
    this.state = next;
    for (const listener of this.listeners) listener(next);
  }
}
