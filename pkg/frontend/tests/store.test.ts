import { describe, expect, it } from "vitest";

import type { CycleReport, ServerMessage } from "../src/protocol.js";
import {
  MAX_HISTORY,
  apply,
  initialState,
  isAimed,
  setConnection,
} from "../src/store.js";

function snapshot(overrides: Record<string, unknown> = {}): ServerMessage {
  return {
    kind: "snapshot",
    v: 1,
    phase: "ready",
    lights: { red: false, yellow: false, blue: false, green: false },
    marker: null,
    servo: { theta_x: 90, theta_y: 90 },
    beam: { x: 320, y: 240 },
    crop: { width: 640, height: 480 },
    history: [],
    ...overrides,
  } as ServerMessage;
}

function report(cycle: number): CycleReport {
  return {
    cycle,
    t_start: 0,
    t_end: 1,
    frames_captured: 3,
    detections: 3,
    detected_centers: [],
    averaged_center: null,
    angles: [75, 100],
    clamped: false,
    outcome: "aimed",
    phase_durations: {},
    log: [],
  };
}

describe("store", () => {
  it("starts disconnected with no phase", () => {
    const state = initialState();
    expect(state.connection).toBe("connecting");
    expect(state.phase).toBeNull();
    expect(state.history).toEqual([]);
  });

  it("snapshot replaces the whole view", () => {
    const state = apply(
      initialState(),
      snapshot({
        phase: "aimed",
        lights: { red: false, yellow: false, blue: false, green: true },
        marker: { x: 480, y: 120, radius: 9 },
        history: [report(1)],
      }),
    );
    expect(state.phase).toBe("aimed");
    expect(state.marker).toEqual({ x: 480, y: 120, radius: 9 });
    expect(state.servo).toEqual({ thetaX: 90, thetaY: 90 });
    expect(state.history).toHaveLength(1);
    expect(isAimed(state)).toBe(true);
  });

  it("phase deltas update phase and lights only", () => {
    const before = apply(initialState(), snapshot());
    const after = apply(before, {
      kind: "phase",
      v: 1,
      t: 3.0,
      phase: "capturing",
      lights: { red: false, yellow: true, blue: false, green: false },
    });
    expect(after.phase).toBe("capturing");
    expect(after.lights.yellow).toBe(true);
    expect(after.servo).toEqual(before.servo);
    expect(after.marker).toEqual(before.marker);
  });

  it("servo deltas move the beam overlay", () => {
    const state = apply(apply(initialState(), snapshot()), {
      kind: "servo",
      v: 1,
      t: 4.0,
      theta_x: 75,
      theta_y: 100,
      beam: { x: 480, y: 120 },
    });
    expect(state.servo).toEqual({ thetaX: 75, thetaY: 100 });
    expect(state.beam).toEqual({ x: 480, y: 120 });
  });

  it("cycle reports accumulate and are capped", () => {
    let state = apply(initialState(), snapshot());
    for (let i = 0; i < MAX_HISTORY + 5; i += 1) {
      state = apply(state, { kind: "cycle", v: 1, report: report(i) });
    }
    expect(state.history).toHaveLength(MAX_HISTORY);
    expect(state.history.at(-1)?.cycle).toBe(MAX_HISTORY + 4);
  });

  it("scene deltas place and remove the marker", () => {
    let state = apply(initialState(), snapshot());
    state = apply(state, {
      kind: "scene",
      v: 1,
      marker: { x: 10, y: 20, radius: 5 },
    });
    expect(state.marker).toEqual({ x: 10, y: 20, radius: 5 });
    state = apply(state, { kind: "scene", v: 1, marker: null });
    expect(state.marker).toBeNull();
  });

  it("errors are surfaced and cleared by the next snapshot", () => {
    let state = apply(initialState(), {
      kind: "error",
      message: "unknown command",
    });
    expect(state.lastError).toBe("unknown command");
    state = apply(state, snapshot());
    expect(state.lastError).toBeNull();
  });

  it("does not mutate the previous state", () => {
    const before = apply(initialState(), snapshot());
    const frozen = JSON.stringify(before);
    apply(before, { kind: "cycle", v: 1, report: report(1) });
    apply(before, { kind: "scene", v: 1, marker: { x: 1, y: 2, radius: 3 } });
    expect(JSON.stringify(before)).toBe(frozen);
  });

  it("setConnection is idempotent", () => {
    const state = initialState();
    expect(setConnection(state, "connecting")).toBe(state);
    expect(setConnection(state, "open").connection).toBe("open");
  });
});
