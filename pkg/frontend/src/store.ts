/**
 * Pure console state store.
 *
 * The websocket client feeds every parsed server message through `apply`;
 * the UI renders from the resulting state. No I/O here, so the whole
 * snapshot/delta logic is unit-testable without a socket.
 */

import type {
  CycleReport,
  Lights,
  Marker,
  PhaseName,
  Point,
  ServerMessage,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface ConsoleState {
  connection: ConnectionStatus;
  /** null until the first snapshot arrives */
  phase: PhaseName | null;
  lights: Lights;
  marker: Marker | null;
  servo: { thetaX: number; thetaY: number } | null;
  beam: Point | null;
  crop: { width: number; height: number };
  history: CycleReport[];
  lastError: string | null;
}

export const MAX_HISTORY = 25;

export const LIGHTS_OFF: Lights = {
  red: false,
  yellow: false,
  blue: false,
  green: false,
};

export function initialState(): ConsoleState {
  return {
    connection: "connecting",
    phase: null,
    lights: LIGHTS_OFF,
    marker: null,
    servo: null,
    beam: null,
    crop: { width: 640, height: 480 },
    history: [],
    lastError: null,
  };
}

/** Apply one server message; returns a new state (input is not mutated). */
export function apply(state: ConsoleState, msg: ServerMessage): ConsoleState {
  switch (msg.kind) {
    case "snapshot":
      return {
        ...state,
        phase: msg.phase,
        lights: msg.lights,
        marker: msg.marker,
        servo: { thetaX: msg.servo.theta_x, thetaY: msg.servo.theta_y },
        beam: msg.beam,
        crop: msg.crop,
        history: msg.history.slice(-MAX_HISTORY),
        lastError: null,
      };
    case "phase":
      return { ...state, phase: msg.phase, lights: msg.lights };
    case "servo":
      return {
        ...state,
        servo: { thetaX: msg.theta_x, thetaY: msg.theta_y },
        beam: msg.beam,
      };
    case "cycle":
      return {
        ...state,
        history: [...state.history, msg.report].slice(-MAX_HISTORY),
      };
    case "scene":
      return { ...state, marker: msg.marker };
    case "error":
      return { ...state, lastError: msg.message };
  }
}

export function setConnection(
  state: ConsoleState,
  connection: ConnectionStatus,
): ConsoleState {
  if (connection === state.connection) return state;
  return { ...state, connection };
}

/** True when the controller reports the aimed (green-light) state. */
export function isAimed(state: ConsoleState): boolean {
  return state.phase === "aimed" && state.lights.green;
}
