"""Hobby-servo model: slew-rate-limited motion and the angle->PWM map."""

from __future__ import annotations

from dataclasses import dataclass, replace

__all__ = ["ServoModel", "servo_step", "angle_to_pulse", "OutOfRange",
           "DEFAULT_SLEW_RATE", "AIM_TOLERANCE_DEG"]

DEFAULT_SLEW_RATE = 315.0  # deg/s, typical hobby-servo class figure
AIM_TOLERANCE_DEG = 0.1


class OutOfRange(ValueError):
    """Angle outside the servo's mechanical limits."""


@dataclass(frozen=True)
class ServoModel:
    """Two-axis pan/tilt bracket state; angles in degrees."""

    current_x: float = 90.0
    current_y: float = 90.0
    target_x: float = 90.0
    target_y: float = 90.0
    slew_rate: float = DEFAULT_SLEW_RATE
    servo_min: float = 0.0
    servo_max: float = 180.0
    pulse_min_us: float = 500.0   # at servo_min
    pulse_max_us: float = 2500.0  # at servo_max

    def __post_init__(self):
        if self.slew_rate <= 0:
            raise ValueError("slew_rate must be > 0")
        if not self.servo_min < self.servo_max:
            raise ValueError("servo_min must be < servo_max")

    def with_target(self, theta_x: float, theta_y: float) -> "ServoModel":
        """Set a new target; out-of-limit requests clamp before any motion."""
        clamp = lambda v: min(max(v, self.servo_min), self.servo_max)
        return replace(self, target_x=clamp(theta_x), target_y=clamp(theta_y))

    @property
    def at_target(self) -> bool:
        return (abs(self.current_x - self.target_x) <= AIM_TOLERANCE_DEG
                and abs(self.current_y - self.target_y) <= AIM_TOLERANCE_DEG)


def servo_step(model: ServoModel, dt: float) -> tuple[ServoModel, bool]:
    """Advance the motion one tick; each axis moves at most slew_rate * dt.

    Returns the new model and an aim-reached flag (both axes within the
    0.1 degree tolerance).
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    max_move = model.slew_rate * dt

    def toward(current: float, target: float) -> float:
        delta = target - current
        if abs(delta) <= max_move:
            return target
        return current + max_move * (1 if delta > 0 else -1)

    new = replace(model,
                  current_x=toward(model.current_x, model.target_x),
                  current_y=toward(model.current_y, model.target_y))
    return new, new.at_target


def angle_to_pulse(theta: float, model: ServoModel) -> float:
    """Affine angle->pulse-width map between the servo's calibration points."""
    if theta < model.servo_min or theta > model.servo_max:
        raise OutOfRange(f"{theta} outside [{model.servo_min}, {model.servo_max}]")
    span = model.servo_max - model.servo_min
    frac = (theta - model.servo_min) / span
    return model.pulse_min_us + frac * (model.pulse_max_us - model.pulse_min_us)
