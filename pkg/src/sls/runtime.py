"""Command interpreter around the pure FSM: one trigger -> one cycle report.

`run_cycle` drives a complete trigger->green cycle synchronously against a
set of adapters (clock, camera, detector, servo, lights). It works the same
over the virtual clock (scenario engine, tests) and the wall clock (live
mode); all timing flows through the clock adapter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable

from .controller import (Command, ControllerState, Event, EventKind, Phase,
                         SignalLights, TimingConfig, step)
from .detection import Detection
from .frames import Frame
from .geometry import (CalibrationProfile, PanTiltAngles, average_centers,
                       compute_pan_tilt, correct_marker_coords, NoDetection, OutOfCrop)
from .sim.servo import ServoModel, servo_step

__all__ = ["CycleReport", "LightsRecorder", "HardwareFaultError", "run_cycle",
           "SERVO_TICK_S", "SERVO_SETTLE_BUDGET_S"]

SERVO_TICK_S = 0.02            # 50 Hz servo update, matching hobby PWM frames
SERVO_SETTLE_BUDGET_S = 10.0   # worst-case travel time before declaring a fault


class HardwareFaultError(RuntimeError):
    """Raised by an adapter to model a hardware failure."""


@dataclass
class LightsRecorder:
    """Signal-light adapter that remembers every state change."""

    history: list[tuple[float, SignalLights]] = field(default_factory=list)

    @property
    def current(self) -> SignalLights:
        return self.history[-1][1] if self.history else SignalLights()

    def set_lights(self, t: float, lights: SignalLights):
        self.history.append((t, lights))


@dataclass
class CycleReport:
    """Everything observable about one trigger cycle."""

    cycle_index: int = 0
    t_start: float = 0.0
    t_end: float = 0.0
    frames_captured: int = 0
    detections: int = 0
    detected_centers: list[tuple[float, float]] = field(default_factory=list)
    averaged_center: tuple[float, float] | None = None
    angles: tuple[float, float] | None = None
    clamped: bool = False
    outcome: str = "incomplete"  # aimed | no_marker | fault
    phase_durations: dict[str, float] = field(default_factory=dict)
    log: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "cycle": self.cycle_index,
            "t_start": round(self.t_start, 6),
            "t_end": round(self.t_end, 6),
            "frames_captured": self.frames_captured,
            "detections": self.detections,
            "detected_centers": [[round(x, 6), round(y, 6)]
                                 for x, y in self.detected_centers],
            "averaged_center": ([round(self.averaged_center[0], 6),
                                 round(self.averaged_center[1], 6)]
                                if self.averaged_center else None),
            "angles": ([round(self.angles[0], 9), round(self.angles[1], 9)]
                       if self.angles else None),
            "clamped": self.clamped,
            "outcome": self.outcome,
            "phase_durations": {k: round(v, 6) for k, v in self.phase_durations.items()},
            "log": self.log,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def run_cycle(state: ControllerState,
              clock,
              camera,
              detector: Callable[[Frame], Detection | None],
              cal: CalibrationProfile,
              servo: ServoModel,
              lights: LightsRecorder,
              cfg: TimingConfig,
              on_command: Callable[[float, Command], None] | None = None,
              on_servo_sample: Callable[[float, ServoModel], None] | None = None,
              on_phase: Callable[[float, Phase, SignalLights], None] | None = None,
              ) -> tuple[ControllerState, ServoModel, CycleReport]:
    """Execute one trigger->completion cycle through the FSM.

    The controller must be in Ready or Aimed. Returns the new controller
    state, the servo state after motion, and the cycle report. A hardware
    fault from any adapter moves the FSM to Fault; the report is still
    produced with outcome "fault".
    """
    report = CycleReport(t_start=clock.now())
    phase_entered = {state.phase: clock.now()}

    def emit(t: float, command: Command):
        if on_command is not None:
            on_command(t, command)

    def apply(new_state: ControllerState, commands: list[Command]):
        nonlocal state, servo
        prev_phase = state.phase
        state = new_state
        if state.phase is not prev_phase:
            now = clock.now()
            entered = phase_entered.get(prev_phase)
            if entered is not None:
                report.phase_durations[prev_phase.value] = (
                    report.phase_durations.get(prev_phase.value, 0.0) + now - entered)
            phase_entered[state.phase] = now
        for command in commands:
            emit(clock.now(), command)
            if command.kind == "set_lights":
                lights.set_lights(clock.now(), command.arg)
                if on_phase is not None:
                    on_phase(clock.now(), state.phase, command.arg)
            elif command.kind == "log_event":
                report.log.append(dict(command.arg, t=round(clock.now(), 6)))
            elif command.kind == "capture_frame":
                pending_captures.append(command.arg)
            elif command.kind == "run_detection":
                run_detection_requested.append(True)
            elif command.kind == "move_servos":
                move_requests.append(command.arg)
        return commands

    pending_captures: list[dict] = []
    run_detection_requested: list[bool] = []
    move_requests: list[PanTiltAngles] = []
    frames: list[Frame] = []

    def post(kind: EventKind, payload: Any = None):
        apply(*step(state, Event(kind, clock.now(), payload), cfg))

    try:
        post(EventKind.TRIGGER_ON)
        if state.phase is not Phase.CAPTURING:
            # Trigger was ignored (wrong phase); nothing more to do.
            report.outcome = "ignored"
            report.t_end = clock.now()
            return state, servo, report

        report.cycle_index = state.cycle_index

        # Capture phase: honor the scheduled capture times.
        while pending_captures:
            capture = pending_captures.pop(0)
            if capture["at"] > clock.now():
                clock.sleep(capture["at"] - clock.now())
            frame = camera.capture(clock.now())
            frames.append(frame)
            report.frames_captured += 1
            post(EventKind.FRAME_CAPTURED, {"index": capture["index"]})

        # Detection phase.
        if run_detection_requested:
            centers = []
            for frame in frames:
                result = detector(frame)
                if result is not None:
                    centers.append((result.center_x, result.center_y))
            clock.sleep(cfg.detect_budget)
            report.detections = len(centers)
            report.detected_centers = centers
            try:
                avg = average_centers(centers, min_count=1)
                report.averaged_center = avg
                centered = correct_marker_coords(avg[0], avg[1], cal.crop)
                angles = compute_pan_tilt(centered, cal)
                report.angles = (angles.theta_x, angles.theta_y)
                report.clamped = angles.clamped
                post(EventKind.DETECTION_DONE, angles)
            except (NoDetection, OutOfCrop):
                post(EventKind.DETECTION_FAILED)
                report.outcome = "no_marker"

        # Aiming phase: rate-limited servo motion on the clock.
        if move_requests:
            target: PanTiltAngles = move_requests.pop(0)
            servo = servo.with_target(target.theta_x, target.theta_y)
            deadline = clock.now() + SERVO_SETTLE_BUDGET_S
            reached = servo.at_target
            while not reached:
                if clock.now() > deadline:
                    raise HardwareFaultError("servo failed to settle")
                servo, reached = servo_step(servo, SERVO_TICK_S)
                clock.sleep(SERVO_TICK_S)
                if on_servo_sample is not None:
                    on_servo_sample(clock.now(), servo)
            post(EventKind.AIM_REACHED)
            report.outcome = "aimed"
    except HardwareFaultError as exc:
        post(EventKind.HARDWARE_FAULT, str(exc))
        report.outcome = "fault"

    report.t_end = clock.now()
    now = clock.now()
    entered = phase_entered.get(state.phase)
    if entered is not None and state.phase.value not in report.phase_durations:
        report.phase_durations[state.phase.value] = now - entered
    return state, servo, report
