"""WebSocket backend for the operator console.

Serves a versioned snapshot + delta message stream over a websocket and
accepts a small set of command messages. The console holds no authoritative
state: every mutation routes through the live controller, and the trigger
command goes out over the real MQTT topic so the console is interchangeable
with the push-button emulator.

Message schema (v1) is documented in docs/console-protocol.md and mirrored
by the frontend's protocol module.
"""

from __future__ import annotations

import asyncio
import json
import logging
import threading

import websockets

from .live import LiveController
from .mqtt import TriggerClient

__all__ = ["ConsoleServer", "PROTOCOL_VERSION"]

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1


class ConsoleServer:
    """Bridges the threaded live controller onto an asyncio websocket server."""

    def __init__(self, controller: LiveController, host: str = "127.0.0.1", port: int = 0):
        self.controller = controller
        self.host = host
        self.port = port  # replaced with the bound port after start
        self._clients: set = set()
        self._loop: asyncio.AbstractEventLoop | None = None
        self._trigger = TriggerClient(controller.broker_addr[0],
                                      controller.broker_addr[1],
                                      topic=controller.topic,
                                      client_id="sls-console")
        self._started = threading.Event()
        self._stop_async: asyncio.Event | None = None
        controller.listeners.on_phase.append(self._phase_changed)
        controller.listeners.on_servo.append(self._servo_sampled)
        controller.listeners.on_cycle.append(self._cycle_done)
        controller.listeners.on_scene.append(self._scene_changed)

    # -- listener callbacks (controller thread) ------------------------------

    def _broadcast(self, message: dict):
        if self._loop is None:
            return
        data = json.dumps(message)
        self._loop.call_soon_threadsafe(self._send_all, data)

    def _send_all(self, data: str):
        for ws in list(self._clients):
            asyncio.ensure_future(self._safe_send(ws, data))

    async def _safe_send(self, ws, data: str):
        try:
            await ws.send(data)
        except websockets.ConnectionClosed:
            self._clients.discard(ws)

    def _phase_changed(self, t: float, phase, lights):
        self._broadcast({"kind": "phase", "v": PROTOCOL_VERSION, "t": round(t, 3),
                         "phase": phase.value,
                         "lights": {"red": lights.red, "yellow": lights.yellow,
                                    "blue": lights.blue, "green": lights.green}})

    def _servo_sampled(self, t: float, theta_x: float, theta_y: float):
        from .sim.beam import beam_aim_point
        beam = beam_aim_point(self.controller.servo, self.controller.cal)
        self._broadcast({"kind": "servo", "v": PROTOCOL_VERSION, "t": round(t, 3),
                         "theta_x": round(theta_x, 4), "theta_y": round(theta_y, 4),
                         "beam": {"x": round(beam[0], 3), "y": round(beam[1], 3)}})

    def _cycle_done(self, report: dict):
        self._broadcast({"kind": "cycle", "v": PROTOCOL_VERSION, "report": report})

    def _scene_changed(self, scene: dict):
        self._broadcast({"kind": "scene", "v": PROTOCOL_VERSION, **scene})

    # -- websocket side -------------------------------------------------------

    async def _handler(self, ws):
        self._clients.add(ws)
        snapshot = dict(self.controller.snapshot(),
                        kind="snapshot", v=PROTOCOL_VERSION)
        await ws.send(json.dumps(snapshot))
        try:
            async for raw in ws:
                await self._handle_command(ws, raw)
        except websockets.ConnectionClosed:
            pass
        finally:
            self._clients.discard(ws)

    async def _handle_command(self, ws, raw: str):
        try:
            msg = json.loads(raw)
            kind = msg["kind"]
        except (ValueError, KeyError):
            await ws.send(json.dumps({"kind": "error", "message": "malformed command"}))
            return
        if kind == "place_marker":
            try:
                self.controller.place_marker(float(msg["x"]), float(msg["y"]),
                                             float(msg.get("radius", 10.0)))
            except (KeyError, ValueError):
                await ws.send(json.dumps({"kind": "error",
                                          "message": "place_marker needs numeric x, y"}))
        elif kind == "remove_marker":
            self.controller.remove_marker()
        elif kind == "set_dropout":
            try:
                self.controller.set_dropout(float(msg["p"]))
            except (KeyError, ValueError):
                await ws.send(json.dumps({"kind": "error",
                                          "message": "set_dropout needs p in [0, 1]"}))
        elif kind == "trigger":
            # Real trigger path: publish ON over MQTT like the button device.
            await asyncio.get_running_loop().run_in_executor(None, self._trigger.press)
        else:
            await ws.send(json.dumps({"kind": "error",
                                      "message": f"unknown command {kind!r}"}))

    async def _serve(self):
        self._stop_async = asyncio.Event()
        async with websockets.serve(self._handler, self.host, self.port) as server:
            self.port = server.sockets[0].getsockname()[1]
            self._started.set()
            log.info("console listening on ws://%s:%d", self.host, self.port)
            print(f"console listening on ws://{self.host}:{self.port}", flush=True)
            await self._stop_async.wait()

    def run_forever(self):
        """Blocking entry point used by the CLI."""
        self._loop = asyncio.new_event_loop()
        asyncio.set_event_loop(self._loop)
        try:
            self._loop.run_until_complete(self._serve())
        finally:
            self._loop.close()

    def start_background(self) -> "ConsoleServer":
        thread = threading.Thread(target=self.run_forever, daemon=True)
        thread.start()
        if not self._started.wait(10.0):
            raise RuntimeError("console server failed to start")
        return self

    def stop(self):
        if self._loop is not None and self._stop_async is not None:
            self._loop.call_soon_threadsafe(self._stop_async.set)
        self._trigger.close()
