"""Scenario scripts: timed actions against the full simulated stack.

File format: plain text, one entry per line.

    # comment
    detector blob | perfect          (optional header, default blob)
    aim_noise 0.0                    (optional, pixels)
    seed 7                           (optional)
    0.0  place_marker 480 120 8
    0.5  set_dropout 0.25
    1.0  trigger
    9.0  remove_marker
    9.5  occlude 2.0
    expect outcome aimed             (assertions, checked per trigger cycle)
    expect beam_error_max 1.0

Action times are seconds on the virtual clock and must be non-decreasing.
Every trigger routes through the real MQTT broker when an endpoint is
supplied; otherwise it is injected directly (the default for deterministic
unit runs — the wire path is covered by its own tests).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..controller import ControllerState, Phase, TimingConfig
from ..detection import BlobParams, reference_blob_detect
from ..geometry import CalibrationProfile, default_profile
from ..runtime import CycleReport, LightsRecorder, run_cycle
from .beam import beam_aim_point
from .camera import DropoutDetector, PerfectDetector, Scene, SimCamera
from .clock import VirtualClock
from .servo import ServoModel

__all__ = ["ScenarioAction", "ScenarioScript", "ScenarioReport",
           "ScenarioError", "ScenarioDeadline",
           "parse_scenario", "load_scenario", "run_scenario"]

CYCLE_BUDGET_S = 30.0  # generous ceiling per trigger in simulated time


class ScenarioError(ValueError):
    """Scenario file is malformed or an action is invalid."""


class ScenarioDeadline(RuntimeError):
    """A cycle exceeded its simulated-time budget."""


@dataclass(frozen=True)
class ScenarioAction:
    t: float
    kind: str
    args: tuple = ()


@dataclass(frozen=True)
class ScenarioScript:
    actions: tuple[ScenarioAction, ...]
    detector: str = "blob"  # blob | perfect
    aim_noise_px: float = 0.0
    seed: int = 0
    expectations: tuple[tuple[str, str], ...] = ()


@dataclass
class ScenarioReport:
    cycles: list[CycleReport] = field(default_factory=list)
    final_beam: tuple[float, float] | None = None
    final_marker: tuple[float, float] | None = None
    final_beam_error_px: float | None = None
    assertion_failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.assertion_failures

    def as_dict(self) -> dict:
        return {
            "cycles": [c.as_dict() for c in self.cycles],
            "final_beam": ([round(v, 6) for v in self.final_beam]
                           if self.final_beam else None),
            "final_marker": ([round(v, 6) for v in self.final_marker]
                             if self.final_marker else None),
            "final_beam_error_px": (round(self.final_beam_error_px, 6)
                                    if self.final_beam_error_px is not None else None),
            "assertion_failures": self.assertion_failures,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


_ACTION_ARITY = {
    "place_marker": 3, "remove_marker": 0, "occlude": 1,
    "trigger": 0, "set_dropout": 1,
}


def parse_scenario(text: str) -> ScenarioScript:
    actions: list[ScenarioAction] = []
    expectations: list[tuple[str, str]] = []
    detector = "blob"
    aim_noise = 0.0
    seed = 0
    last_t = -math.inf
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "detector":
            if len(parts) != 2 or parts[1] not in ("blob", "perfect"):
                raise ScenarioError(f"line {line_no}: detector must be blob or perfect")
            detector = parts[1]
            continue
        if head == "aim_noise":
            aim_noise = float(parts[1])
            continue
        if head == "seed":
            seed = int(parts[1])
            continue
        if head == "expect":
            if len(parts) != 3:
                raise ScenarioError(f"line {line_no}: expect takes a key and a value")
            expectations.append((parts[1], parts[2]))
            continue
        try:
            t = float(head)
        except ValueError as exc:
            raise ScenarioError(f"line {line_no}: unknown directive {head!r}") from exc
        if t < last_t:
            raise ScenarioError(f"line {line_no}: action times must be non-decreasing")
        last_t = t
        if len(parts) < 2 or parts[1] not in _ACTION_ARITY:
            raise ScenarioError(f"line {line_no}: unknown action")
        kind = parts[1]
        args = tuple(float(a) for a in parts[2:])
        if len(args) != _ACTION_ARITY[kind]:
            raise ScenarioError(f"line {line_no}: {kind} takes "
                                f"{_ACTION_ARITY[kind]} arguments")
        if kind == "set_dropout" and not 0.0 <= args[0] <= 1.0:
            raise ScenarioError(f"line {line_no}: dropout must be in [0, 1]")
        actions.append(ScenarioAction(t, kind, args))
    return ScenarioScript(tuple(actions), detector, aim_noise, seed, tuple(expectations))


def load_scenario(path: str) -> ScenarioScript:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_scenario(handle.read())


def run_scenario(script: ScenarioScript,
                 cal: CalibrationProfile | None = None,
                 cfg: TimingConfig | None = None) -> ScenarioReport:
    """Execute the timeline against the full simulated stack."""
    cal = cal or default_profile()
    # Simulation default: initialization collapses to 0.1 s.
    cfg = cfg or TimingConfig(init_duration=0.1)

    clock = VirtualClock()
    scene = Scene()
    camera = SimCamera(scene, cal.crop, seed=script.seed)
    if script.detector == "perfect":
        base_detector = PerfectDetector(scene)
    else:
        params = BlobParams()
        base_detector = lambda frame: reference_blob_detect(frame, params)
    detector = DropoutDetector(base_detector, dropout=0.0, seed=script.seed + 1)

    servo = ServoModel(current_x=cal.theta_x_ref, current_y=cal.theta_y_ref,
                       target_x=cal.theta_x_ref, target_y=cal.theta_y_ref,
                       servo_min=cal.servo_min, servo_max=cal.servo_max)
    lights = LightsRecorder()
    state = ControllerState(phase=Phase.READY, entered_at=clock.now())
    report = ScenarioReport()
    beam_rng = np.random.default_rng(script.seed + 2)
    occlusion_until = -1.0

    for action in script.actions:
        if action.t > clock.now():
            clock.sleep(action.t - clock.now())
        if occlusion_until >= 0 and clock.now() >= occlusion_until:
            scene.occluded = False
            occlusion_until = -1.0
        if action.kind == "place_marker":
            scene.place_marker(*action.args)
        elif action.kind == "remove_marker":
            scene.remove_marker()
        elif action.kind == "occlude":
            scene.occluded = True
            occlusion_until = clock.now() + action.args[0]
        elif action.kind == "set_dropout":
            detector.dropout = action.args[0]
        elif action.kind == "trigger":
            t0 = clock.now()
            state, servo, cycle = run_cycle(state, clock, camera, detector,
                                            cal, servo, lights, cfg)
            if clock.now() - t0 > CYCLE_BUDGET_S:
                raise ScenarioDeadline(f"cycle took {clock.now() - t0:.1f} s simulated")
            report.cycles.append(cycle)
        if occlusion_until >= 0 and clock.now() >= occlusion_until:
            scene.occluded = False
            occlusion_until = -1.0

    beam = beam_aim_point(servo, cal, script.aim_noise_px, beam_rng)
    report.final_beam = beam
    if scene.marker is not None:
        cx, cy, _ = scene.marker
        report.final_marker = (cx, cy)
        report.final_beam_error_px = math.hypot(beam[0] - cx, beam[1] - cy)

    _check_expectations(script, report)
    return report


def _check_expectations(script: ScenarioScript, report: ScenarioReport):
    for key, value in script.expectations:
        if key == "outcome":
            outcomes = [c.outcome for c in report.cycles]
            if not outcomes or outcomes[-1] != value:
                report.assertion_failures.append(
                    f"expected final outcome {value}, got {outcomes or 'no cycles'}")
        elif key == "beam_error_max":
            bound = float(value)
            err = report.final_beam_error_px
            if err is None or err > bound:
                report.assertion_failures.append(
                    f"expected final beam error <= {bound}, got {err}")
        elif key == "cycles":
            expected = int(value)
            if len(report.cycles) != expected:
                report.assertion_failures.append(
                    f"expected {expected} cycles, got {len(report.cycles)}")
        else:
            report.assertion_failures.append(f"unknown expectation {key!r}")
