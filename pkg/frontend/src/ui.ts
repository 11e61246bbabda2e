/**
 * Canvas console UI: camera-crop view with a draggable marker, beam
 * overlay, signal lights, trigger button, dropout slider and cycle log.
 *
 * Rendering is a pure function of ConsoleState; interactions only emit
 * commands through the client. DOM construction lives here so main.ts is
 * just wiring.
 */

import { ConsoleClient } from "./client.js";
import {
  placeMarkerCommand,
  removeMarkerCommand,
  setDropoutCommand,
  triggerCommand,
} from "./protocol.js";
import { ConsoleState } from "./store.js";

const LIGHT_COLORS: Record<string, string> = {
  red: "#e04a3f",
  yellow: "#e6c229",
  blue: "#3f7fe0",
  green: "#42b05c",
};

const MARKER_COLOR = "#1e1eff";
const BEAM_COLOR = "#ffd34d";

export interface ConsoleView {
  root: HTMLElement;
  dispose(): void;
}

export function mountConsole(
  container: HTMLElement,
  client: ConsoleClient,
): ConsoleView {
  const doc = container.ownerDocument;

  const root = doc.createElement("div");
  root.className = "sls-console";

  const banner = doc.createElement("div");
  banner.className = "sls-banner";
  root.appendChild(banner);

  const statusRow = doc.createElement("div");
  statusRow.className = "sls-status";
  const lightsBox = doc.createElement("span");
  lightsBox.className = "sls-lights";
  const phaseLabel = doc.createElement("span");
  phaseLabel.className = "sls-phase";
  statusRow.append(lightsBox, phaseLabel);
  root.appendChild(statusRow);

  const canvas = doc.createElement("canvas");
  canvas.className = "sls-view";
  root.appendChild(canvas);

  const controls = doc.createElement("div");
  controls.className = "sls-controls";
  const triggerButton = doc.createElement("button");
  triggerButton.textContent = "Trigger";
  const clearButton = doc.createElement("button");
  clearButton.textContent = "Remove marker";
  const dropout = doc.createElement("input");
  dropout.type = "range";
  dropout.min = "0";
  dropout.max = "1";
  dropout.step = "0.05";
  dropout.value = "0";
  const dropoutLabel = doc.createElement("label");
  dropoutLabel.append("detector dropout ", dropout);
  controls.append(triggerButton, clearButton, dropoutLabel);
  root.appendChild(controls);

  const log = doc.createElement("ol");
  log.className = "sls-log";
  root.appendChild(log);

  container.appendChild(root);

  triggerButton.addEventListener("click", () => client.send(triggerCommand()));
  clearButton.addEventListener("click", () =>
    client.send(removeMarkerCommand()),
  );
  dropout.addEventListener("change", () =>
    client.send(setDropoutCommand(Number(dropout.value))),
  );

  // Marker drag: click places, drag moves, release commits the final pose.
  let dragging = false;
  const toCrop = (ev: MouseEvent): { x: number; y: number } => {
    const rect = canvas.getBoundingClientRect();
    const state = client.getState();
    const sx = state.crop.width / rect.width;
    const sy = state.crop.height / rect.height;
    return {
      x: Math.min(Math.max((ev.clientX - rect.left) * sx, 1), state.crop.width - 1),
      y: Math.min(Math.max((ev.clientY - rect.top) * sy, 1), state.crop.height - 1),
    };
  };
  const placeAt = (ev: MouseEvent) => {
    const p = toCrop(ev);
    const radius = client.getState().marker?.radius ?? 10;
    client.send(placeMarkerCommand(p.x, p.y, radius));
  };
  canvas.addEventListener("mousedown", (ev) => {
    dragging = true;
    placeAt(ev as MouseEvent);
  });
  canvas.addEventListener("mousemove", (ev) => {
    if (dragging) placeAt(ev as MouseEvent);
  });
  const stopDrag = () => {
    dragging = false;
  };
  canvas.addEventListener("mouseup", stopDrag);
  canvas.addEventListener("mouseleave", stopDrag);

  const render = (state: ConsoleState) => {
    banner.textContent =
      state.connection === "open"
        ? ""
        : state.connection === "connecting"
          ? "connecting to controller…"
          : "connection lost — retrying";
    banner.style.display = state.connection === "open" ? "none" : "block";

    phaseLabel.textContent = state.phase ?? "—";
    lightsBox.textContent = "";
    for (const name of ["red", "yellow", "blue", "green"] as const) {
      const dot = doc.createElement("span");
      dot.className = "sls-light";
      dot.style.background = state.lights[name]
        ? LIGHT_COLORS[name]
        : "#333333";
      dot.title = name;
      lightsBox.appendChild(dot);
    }

    canvas.width = state.crop.width;
    canvas.height = state.crop.height;
    const ctx = canvas.getContext("2d");
    if (ctx !== null) drawScene(ctx, state);

    log.textContent = "";
    for (const report of state.history.slice(-8).reverse()) {
      const item = doc.createElement("li");
      item.textContent =
        `cycle ${report.cycle}: ${report.outcome}, ` +
        `${report.detections}/${report.frames_captured} detections` +
        (report.angles !== null
          ? `, angles (${report.angles[0].toFixed(1)}°, ${report.angles[1].toFixed(1)}°)`
          : "");
      log.appendChild(item);
    }
  };

  const unsubscribe = client.subscribe(render);
  return {
    root,
    dispose() {
      unsubscribe();
      root.remove();
    },
  };
}

function drawScene(ctx: CanvasRenderingContext2D, state: ConsoleState): void {
  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, state.crop.width, state.crop.height);
  ctx.strokeStyle = "#2a3138";
  ctx.strokeRect(0.5, 0.5, state.crop.width - 1, state.crop.height - 1);

  if (state.marker !== null) {
    ctx.beginPath();
    ctx.arc(state.marker.x, state.marker.y, state.marker.radius, 0, 2 * Math.PI);
    ctx.fillStyle = MARKER_COLOR;
    ctx.fill();
  }

  if (state.beam !== null) {
    const { x, y } = state.beam;
    ctx.strokeStyle = BEAM_COLOR;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(x, y, 14, 0, 2 * Math.PI);
    ctx.moveTo(x - 20, y);
    ctx.lineTo(x + 20, y);
    ctx.moveTo(x, y - 20);
    ctx.lineTo(x, y + 20);
    ctx.stroke();
  }
}
