"""Trigger-driven controller workflow as a pure finite state machine.

The FSM is a pure function (state, event) -> (state, commands). All timing
enters as events from a clock adapter, so every trace is replayable. The
runtime around it (see `sls.runtime`) interprets the emitted commands
against camera/detector/servo/light adapters.

Lifecycle: Initializing -> Ready -> Capturing -> Detecting -> Aiming ->
Aimed -> (next trigger) Capturing. Signal lights are a deterministic
projection of the phase: red while initializing (and in Fault), yellow
while capturing, blue while detecting and aiming, green once aimed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any

__all__ = [
    "Phase",
    "SignalLights",
    "TimingConfig",
    "EventKind",
    "Event",
    "Command",
    "ControllerState",
    "FRAMES_PER_TRIGGER",
    "lights_for",
    "initial_state",
    "step",
]

FRAMES_PER_TRIGGER = 3  # the workflow captures exactly three images per trigger


class Phase(Enum):
    INITIALIZING = "initializing"
    READY = "ready"
    CAPTURING = "capturing"
    DETECTING = "detecting"
    AIMING = "aiming"
    AIMED = "aimed"
    FAULT = "fault"


@dataclass(frozen=True)
class SignalLights:
    red: bool = False
    yellow: bool = False
    blue: bool = False
    green: bool = False

    def on_count(self) -> int:
        return sum((self.red, self.yellow, self.blue, self.green))


_PHASE_LIGHTS = {
    Phase.INITIALIZING: SignalLights(red=True),
    Phase.READY: SignalLights(),
    Phase.CAPTURING: SignalLights(yellow=True),
    Phase.DETECTING: SignalLights(blue=True),
    Phase.AIMING: SignalLights(blue=True),
    Phase.AIMED: SignalLights(green=True),
    Phase.FAULT: SignalLights(red=True),
}


def lights_for(phase: Phase) -> SignalLights:
    """Deterministic phase -> lights mapping; at most one light is ever on."""
    return _PHASE_LIGHTS[phase]


@dataclass(frozen=True)
class TimingConfig:
    """Workflow timings in seconds. Defaults follow the live device;
    simulation configs shrink init_duration to keep runs fast."""

    init_duration: float = 20.0
    capture_window: float = 5.0
    detect_budget: float = 3.0

    def __post_init__(self):
        for name in ("init_duration", "capture_window", "detect_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


class EventKind(Enum):
    POWER_ON = "power_on"
    INIT_DONE = "init_done"
    TRIGGER_ON = "trigger_on"
    TRIGGER_OFF = "trigger_off"
    FRAME_CAPTURED = "frame_captured"
    CAPTURE_WINDOW_ELAPSED = "capture_window_elapsed"
    DETECTION_DONE = "detection_done"
    DETECTION_FAILED = "detection_failed"
    AIM_REACHED = "aim_reached"
    HARDWARE_FAULT = "hardware_fault"


@dataclass(frozen=True)
class Event:
    kind: EventKind
    t: float = 0.0  # seconds on the controller clock, non-decreasing
    payload: Any = None


@dataclass(frozen=True)
class Command:
    """Side-effect request emitted by the FSM; the runtime executes it."""

    kind: str  # set_lights | start_capture | capture_frame | run_detection
    #          # | move_servos | log_event
    arg: Any = None


@dataclass(frozen=True)
class ControllerState:
    phase: Phase = Phase.INITIALIZING
    entered_at: float = 0.0
    frames_captured: int = 0
    cycle_index: int = 0
    last_result: Any = None  # PanTiltAngles of the last successful cycle


def initial_state() -> ControllerState:
    return ControllerState()


def _enter(state: ControllerState, phase: Phase, t: float, **changes) -> ControllerState:
    return replace(state, phase=phase, entered_at=t, **changes)


def _lights_cmd(phase: Phase) -> Command:
    return Command("set_lights", lights_for(phase))


def _start_cycle(state: ControllerState, event: Event,
                 cfg: TimingConfig) -> tuple[ControllerState, list[Command]]:
    """Trigger accepted: enter Capturing and schedule all three captures."""
    new = _enter(state, Phase.CAPTURING, event.t,
                 frames_captured=0, cycle_index=state.cycle_index + 1)
    # Shots spaced across the window, the last one at its end, so the
    # capture phase (yellow light) spans the whole window.
    spacing = cfg.capture_window / FRAMES_PER_TRIGGER
    commands = [_lights_cmd(Phase.CAPTURING), Command("start_capture")]
    commands += [Command("capture_frame", {"index": i, "at": event.t + (i + 1) * spacing})
                 for i in range(FRAMES_PER_TRIGGER)]
    return new, commands


def step(state: ControllerState, event: Event,
         cfg: TimingConfig) -> tuple[ControllerState, list[Command]]:
    """Pure transition function; unexpected events are absorbed with a log."""
    kind = event.kind

    if kind is EventKind.HARDWARE_FAULT:
        return (_enter(state, Phase.FAULT, event.t),
                [_lights_cmd(Phase.FAULT), Command("log_event", {"what": "fault",
                                                                 "detail": event.payload})])

    if kind is EventKind.POWER_ON:
        return (_enter(state, Phase.INITIALIZING, event.t),
                [_lights_cmd(Phase.INITIALIZING), Command("log_event", {"what": "power_on"})])

    if state.phase is Phase.INITIALIZING and kind is EventKind.INIT_DONE:
        return (_enter(state, Phase.READY, event.t),
                [_lights_cmd(Phase.READY), Command("log_event", {"what": "ready"})])

    if kind is EventKind.TRIGGER_ON:
        if state.phase in (Phase.READY, Phase.AIMED):
            return _start_cycle(state, event, cfg)
        # Re-trigger during an active cycle (or too early) is ignored, not
        # queued: acting on a stale marker position later would be unsafe.
        return state, [Command("log_event", {"what": "trigger_ignored",
                                             "phase": state.phase.value})]

    if kind is EventKind.TRIGGER_OFF:
        # 'OFF' is the trigger's idle heartbeat, not an abort.
        return state, [Command("log_event", {"what": "trigger_off"})]

    if state.phase is Phase.CAPTURING:
        if kind is EventKind.FRAME_CAPTURED:
            captured = state.frames_captured + 1
            if captured < FRAMES_PER_TRIGGER:
                return replace(state, frames_captured=captured), []
            new = _enter(state, Phase.DETECTING, event.t, frames_captured=captured)
            return new, [_lights_cmd(Phase.DETECTING), Command("run_detection")]
        if kind is EventKind.CAPTURE_WINDOW_ELAPSED:
            # Proceed with however many frames arrived in the window.
            new = _enter(state, Phase.DETECTING, event.t)
            return new, [_lights_cmd(Phase.DETECTING), Command("run_detection")]

    if state.phase is Phase.DETECTING:
        if kind is EventKind.DETECTION_DONE:
            new = _enter(state, Phase.AIMING, event.t, last_result=event.payload)
            return new, [_lights_cmd(Phase.AIMING), Command("move_servos", event.payload)]
        if kind is EventKind.DETECTION_FAILED:
            new = _enter(state, Phase.READY, event.t)
            return new, [_lights_cmd(Phase.READY), Command("log_event", {"what": "no_marker"})]

    if state.phase is Phase.AIMING and kind is EventKind.AIM_REACHED:
        new = _enter(state, Phase.AIMED, event.t)
        return new, [_lights_cmd(Phase.AIMED), Command("log_event", {"what": "aimed"})]

    return state, [Command("log_event", {"what": "unexpected_event",
                                         "event": kind.value, "phase": state.phase.value})]
