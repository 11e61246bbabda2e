"""Live controller: the real workflow on the wall clock, simulated hardware.

Hosts the embedded MQTT broker, subscribes to the trigger topic, and runs
trigger cycles through the same `run_cycle` path the scenario engine uses.
Adapters may run on their own threads but communicate only through the
controller's ordered request queue. Observers (log writer, console server)
attach listener callbacks; they never mutate controller state.
"""

from __future__ import annotations

import logging
import queue
import threading
from dataclasses import dataclass, field
from typing import Callable

from .controller import (ControllerState, Phase, SignalLights, TimingConfig,
                         initial_state, lights_for)
from .detection import BlobParams, reference_blob_detect
from .geometry import CalibrationProfile
from .mqtt import Broker, MqttClient, DEFAULT_TRIGGER_TOPIC
from .runtime import LightsRecorder, run_cycle
from .sim.beam import beam_aim_point
from .sim.camera import DropoutDetector, PerfectDetector, Scene, SimCamera
from .sim.clock import WallClock
from .sim.servo import ServoModel

__all__ = ["LiveListeners", "LiveController"]

log = logging.getLogger(__name__)


@dataclass
class LiveListeners:
    """Observer callbacks; all invoked on the controller thread."""

    on_phase: list[Callable[[float, Phase, SignalLights], None]] = field(default_factory=list)
    on_servo: list[Callable[[float, float, float], None]] = field(default_factory=list)
    on_cycle: list[Callable[[dict], None]] = field(default_factory=list)
    on_scene: list[Callable[[dict], None]] = field(default_factory=list)


class LiveController:
    """Owns the broker, the scene, and the controller loop thread."""

    def __init__(self,
                 cal: CalibrationProfile,
                 cfg: TimingConfig | None = None,
                 broker_host: str = "127.0.0.1",
                 broker_port: int = 0,
                 external_broker: tuple[str, int] | None = None,
                 topic: str = DEFAULT_TRIGGER_TOPIC,
                 detector: str = "blob",
                 seed: int = 0):
        self.cal = cal
        self.cfg = cfg or TimingConfig()
        self.topic = topic
        self.clock = WallClock()
        self.scene = Scene()
        self.camera = SimCamera(self.scene, cal.crop, seed=seed)
        if detector == "perfect":
            base = PerfectDetector(self.scene)
        else:
            params = BlobParams()
            base = lambda frame: reference_blob_detect(frame, params)
        self.detector = DropoutDetector(base, dropout=0.0, seed=seed + 1)
        self.servo = ServoModel(current_x=cal.theta_x_ref, current_y=cal.theta_y_ref,
                                target_x=cal.theta_x_ref, target_y=cal.theta_y_ref,
                                servo_min=cal.servo_min, servo_max=cal.servo_max)
        self.lights = LightsRecorder()
        self.state: ControllerState = initial_state()
        self.listeners = LiveListeners()
        self.cycle_history: list[dict] = []

        self._broker: Broker | None = None
        if external_broker is None:
            self._broker = Broker(broker_host, broker_port)
            self.broker_addr = (broker_host, None)  # port known after start
        else:
            self.broker_addr = external_broker
        self._sub: MqttClient | None = None
        self._requests: queue.Queue = queue.Queue()
        self._thread: threading.Thread | None = None
        self._stop = threading.Event()
        self.ready = threading.Event()

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> "LiveController":
        if self._broker is not None:
            self._broker.start()
            self.broker_addr = (self._broker.host, self._broker.port)
        self._thread = threading.Thread(target=self._run, name="sls-controller", daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._stop.set()
        self._requests.put(("shutdown", None))
        if self._thread is not None:
            self._thread.join(timeout=5.0)
        if self._sub is not None:
            self._sub.close()
        if self._broker is not None:
            self._broker.stop()

    # -- command surface (thread-safe) ---------------------------------------

    def request_trigger(self):
        """Direct trigger injection (console path publishes via MQTT instead)."""
        self._requests.put(("trigger", None))

    def place_marker(self, cx: float, cy: float, radius: float):
        self._requests.put(("place_marker", (cx, cy, radius)))

    def remove_marker(self):
        self._requests.put(("remove_marker", None))

    def set_dropout(self, p: float):
        self._requests.put(("set_dropout", p))

    def snapshot(self) -> dict:
        beam = beam_aim_point(self.servo, self.cal)
        marker = self.scene.marker
        return {
            "phase": self.state.phase.value,
            "lights": _lights_dict(self.lights.current),
            "marker": ({"x": marker[0], "y": marker[1], "radius": marker[2]}
                       if marker else None),
            "servo": {"theta_x": self.servo.current_x, "theta_y": self.servo.current_y},
            "beam": {"x": beam[0], "y": beam[1]},
            "crop": {"width": self.cal.crop.width, "height": self.cal.crop.height},
            "history": self.cycle_history[-10:],
        }

    # -- controller thread ----------------------------------------------------

    def _on_mqtt(self, topic: str, payload: bytes):
        # Application-layer filter: only the exact strings ON/OFF mean anything.
        if payload == b"ON":
            self._requests.put(("trigger", None))
        elif payload == b"OFF":
            log.debug("trigger heartbeat OFF")
        else:
            log.warning("dropping unexpected trigger payload %r", payload)

    def _notify_phase(self):
        t = self.clock.now()
        lights = lights_for(self.state.phase)
        self.lights.set_lights(t, lights)
        for cb in self.listeners.on_phase:
            cb(t, self.state.phase, lights)

    def _run(self):
        from .controller import Event, EventKind, step

        # Initialization window (red light), then MQTT hookup.
        self.state, _ = step(self.state, Event(EventKind.POWER_ON, self.clock.now()), self.cfg)
        self._notify_phase()
        self.clock.sleep(self.cfg.init_duration)
        self._sub = MqttClient(self.broker_addr[0], self.broker_addr[1],
                               client_id="sls-controller", on_message=self._on_mqtt)
        try:
            self._sub.connect_with_retry()
            self._sub.subscribe(self.topic)
        except ConnectionError as exc:
            log.error("MQTT connection failed: %s", exc)
            self._stop.set()
            return
        self.state, _ = step(self.state, Event(EventKind.INIT_DONE, self.clock.now()), self.cfg)
        self._notify_phase()
        self.ready.set()
        log.info("controller ready; trigger topic %r", self.topic)

        while not self._stop.is_set():
            try:
                kind, arg = self._requests.get(timeout=0.2)
            except queue.Empty:
                continue
            if kind == "shutdown":
                break
            if kind == "place_marker":
                self.scene.place_marker(*arg)
                self._notify_scene()
            elif kind == "remove_marker":
                self.scene.remove_marker()
                self._notify_scene()
            elif kind == "set_dropout":
                self.detector.dropout = arg
            elif kind == "trigger":
                self._run_trigger_cycle()
                self._drop_stale_triggers()
        log.info("controller stopped in phase %s", self.state.phase.value)

    def _drop_stale_triggers(self):
        """Triggers that arrived while a cycle was running are stale: acting
        on them now would aim at an old marker pose. Drop, keep the rest."""
        keep = []
        while True:
            try:
                item = self._requests.get_nowait()
            except queue.Empty:
                break
            if item[0] == "trigger":
                log.info("trigger ignored: arrived during an active cycle")
                continue
            keep.append(item)
        for item in keep:
            self._requests.put(item)

    def _notify_scene(self):
        marker = self.scene.marker
        payload = ({"x": marker[0], "y": marker[1], "radius": marker[2]}
                   if marker else None)
        for cb in self.listeners.on_scene:
            cb({"marker": payload})

    def _run_trigger_cycle(self):
        if self.state.phase not in (Phase.READY, Phase.AIMED):
            log.info("trigger ignored in phase %s", self.state.phase.value)
            return

        def on_servo_sample(t, servo):
            self.servo = servo
            for cb in self.listeners.on_servo:
                cb(t, servo.current_x, servo.current_y)

        def on_phase(t, phase, lights):
            for cb in self.listeners.on_phase:
                cb(t, phase, lights)

        self.state, self.servo, report = run_cycle(
            self.state, self.clock, self.camera, self.detector, self.cal,
            self.servo, self.lights, self.cfg,
            on_servo_sample=on_servo_sample, on_phase=on_phase)
        record = report.as_dict()
        self.cycle_history.append(record)
        for cb in self.listeners.on_cycle:
            cb(record)


def _lights_dict(lights: SignalLights) -> dict:
    return {"red": lights.red, "yellow": lights.yellow,
            "blue": lights.blue, "green": lights.green}
