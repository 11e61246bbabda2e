/**
 * Wire types for the console websocket protocol (v1).
 *
 * Mirrors the backend's message schema (see docs/console-protocol.md in the
 * repository root). All messages are JSON text frames; every server message
 * carries a `v` field and unknown kinds/versions are ignored.
 */

export const PROTOCOL_VERSION = 1;

export type PhaseName =
  | "initializing"
  | "ready"
  | "capturing"
  | "detecting"
  | "aiming"
  | "aimed"
  | "fault";

export interface Lights {
  red: boolean;
  yellow: boolean;
  blue: boolean;
  green: boolean;
}

export interface Marker {
  x: number;
  y: number;
  radius: number;
}

export interface ServoPose {
  theta_x: number;
  theta_y: number;
}

export interface Point {
  x: number;
  y: number;
}

export interface CycleReport {
  cycle: number;
  t_start: number;
  t_end: number;
  frames_captured: number;
  detections: number;
  detected_centers: [number, number][];
  averaged_center: [number, number] | null;
  angles: [number, number] | null;
  clamped: boolean;
  outcome: "aimed" | "no_marker" | "fault" | "ignored" | "incomplete";
  phase_durations: Record<string, number>;
  log: Record<string, unknown>[];
}

export interface SnapshotMessage {
  kind: "snapshot";
  v: number;
  phase: PhaseName;
  lights: Lights;
  marker: Marker | null;
  servo: ServoPose;
  beam: Point;
  crop: { width: number; height: number };
  history: CycleReport[];
}

export interface PhaseMessage {
  kind: "phase";
  v: number;
  t: number;
  phase: PhaseName;
  lights: Lights;
}

export interface ServoMessage {
  kind: "servo";
  v: number;
  t: number;
  theta_x: number;
  theta_y: number;
  beam: Point;
}

export interface CycleMessage {
  kind: "cycle";
  v: number;
  report: CycleReport;
}

export interface SceneMessage {
  kind: "scene";
  v: number;
  marker: Marker | null;
}

export interface ErrorMessage {
  kind: "error";
  message: string;
}

export type ServerMessage =
  | SnapshotMessage
  | PhaseMessage
  | ServoMessage
  | CycleMessage
  | SceneMessage
  | ErrorMessage;

const SERVER_KINDS = new Set([
  "snapshot",
  "phase",
  "servo",
  "cycle",
  "scene",
  "error",
]);

/**
 * Parse one incoming frame. Returns null for anything that is not a valid
 * v1 server message (bad JSON, unknown kind, wrong version) — the client
 * skips such frames instead of breaking the session.
 */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as { kind?: unknown; v?: unknown };
  if (typeof msg.kind !== "string" || !SERVER_KINDS.has(msg.kind)) return null;
  // `error` replies carry no version; everything else must be v1.
  if (msg.kind !== "error" && msg.v !== PROTOCOL_VERSION) return null;
  return data as ServerMessage;
}

export type Command =
  | { kind: "trigger" }
  | { kind: "place_marker"; x: number; y: number; radius: number }
  | { kind: "remove_marker" }
  | { kind: "set_dropout"; p: number };

export function triggerCommand(): Command {
  return { kind: "trigger" };
}

export function placeMarkerCommand(x: number, y: number, radius = 10): Command {
  if (!Number.isFinite(x) || !Number.isFinite(y) || !(radius > 0)) {
    throw new Error("place_marker needs finite x, y and radius > 0");
  }
  return { kind: "place_marker", x, y, radius };
}

export function removeMarkerCommand(): Command {
  return { kind: "remove_marker" };
}

export function setDropoutCommand(p: number): Command {
  if (!(p >= 0 && p <= 1)) {
    throw new Error("set_dropout needs p in [0, 1]");
  }
  return { kind: "set_dropout", p };
}

export function encodeCommand(command: Command): string {
  return JSON.stringify(command);
}
