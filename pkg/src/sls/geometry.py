"""Calibration profile and the pixel-to-servo-angle mapping.

All functions here are pure and operate on immutable values, so they are
safe to call from any thread. Coordinate convention throughout the project:
image origin top-left, x rightward, y downward. Angles are degrees.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

__all__ = [
    "CropRegion",
    "CalibrationProfile",
    "CenteredPoint",
    "PanTiltAngles",
    "OutOfCrop",
    "NoDetection",
    "NotInvertible",
    "ParseError",
    "InvalidProfile",
    "correct_marker_coords",
    "compute_pan_tilt",
    "invert_pan_tilt",
    "average_centers",
    "load_calibration",
    "load_calibration_file",
    "default_profile",
    "CALIBRATION_SCHEMA_VERSION",
]

CALIBRATION_SCHEMA_VERSION = 1


class OutOfCrop(ValueError):
    """A detected point lies outside the crop region (detector bug)."""


class NoDetection(ValueError):
    """Fewer detections available than the required minimum."""


class NotInvertible(ValueError):
    """The angle mapping has a zero half-span and cannot be inverted."""


class ParseError(ValueError):
    """Calibration document is malformed or missing required fields."""


class InvalidProfile(ValueError):
    """Calibration document parsed but violates a profile invariant."""

    def __init__(self, field: str, reason: str = ""):
        self.field = field
        super().__init__(f"invalid calibration field {field!r}" + (f": {reason}" if reason else ""))


@dataclass(frozen=True)
class CropRegion:
    """Axis-aligned crop inside the camera frame, in whole pixels."""

    start_x: int
    start_y: int
    width: int
    height: int

    def __post_init__(self):
        if self.start_x < 0 or self.start_y < 0:
            raise InvalidProfile("crop_start", "start coordinates must be >= 0")
        if self.width <= 0:
            raise InvalidProfile("crop_width", "must be > 0")
        if self.height <= 0:
            raise InvalidProfile("crop_height", "must be > 0")

    def fits_frame(self, frame_width: int, frame_height: int) -> bool:
        return (self.start_x + self.width <= frame_width
                and self.start_y + self.height <= frame_height)


@dataclass(frozen=True)
class CalibrationProfile:
    """Full parameter set of the pixel-to-angle mapping.

    theta_*_ref aim the light at the crop center; theta_*_max is the angular
    half-span from the reference to the crop boundary. The crop boundary maps
    to theta_ref -/+ theta_max (minus on the positive pixel side).
    """

    crop: CropRegion
    theta_x_ref: float
    theta_y_ref: float
    theta_x_max: float
    theta_y_max: float
    servo_min: float = 0.0
    servo_max: float = 180.0

    def __post_init__(self):
        if not self.theta_x_max > 0:
            raise InvalidProfile("theta_x_max", "half-span must be > 0")
        if not self.theta_y_max > 0:
            raise InvalidProfile("theta_y_max", "half-span must be > 0")
        if not self.servo_min < self.servo_max:
            raise InvalidProfile("servo_max", "servo_min must be < servo_max")
        # The whole crop must be reachable without clamping.
        for name, ref, span in (("theta_x_ref", self.theta_x_ref, self.theta_x_max),
                                ("theta_y_ref", self.theta_y_ref, self.theta_y_max)):
            if ref - span < self.servo_min or ref + span > self.servo_max:
                raise InvalidProfile(name, "reference +/- half-span exceeds servo limits")


@dataclass(frozen=True)
class CenteredPoint:
    """Pixel point relative to the crop center (x rightward, y downward)."""

    x: float
    y: float


@dataclass(frozen=True)
class PanTiltAngles:
    """Target pan (theta_x) and tilt (theta_y) in degrees.

    `clamped` is set when the requested angles had to be limited to the
    servo range; callers may want to log it.
    """

    theta_x: float
    theta_y: float
    clamped: bool = False


def default_profile() -> CalibrationProfile:
    """Project default used by tests, examples, and the simulator."""
    return CalibrationProfile(
        crop=CropRegion(0, 0, 640, 480),
        theta_x_ref=90.0, theta_y_ref=90.0,
        theta_x_max=30.0, theta_y_max=20.0,
        servo_min=0.0, servo_max=180.0,
    )


def correct_marker_coords(x: float, y: float, crop: CropRegion) -> CenteredPoint:
    """Shift detected crop coordinates so the crop center becomes the origin."""
    if not (0 <= x <= crop.width and 0 <= y <= crop.height):
        raise OutOfCrop(f"({x}, {y}) outside {crop.width}x{crop.height} crop")
    return CenteredPoint(x - crop.width / 2.0, y - crop.height / 2.0)


def compute_pan_tilt(marker: CenteredPoint, cal: CalibrationProfile) -> PanTiltAngles:
    """Map a center-relative marker position to pan/tilt angles.

    Linear in each axis: the crop center maps to the reference angles and
    the crop boundary to reference -/+ half-span. Results are clamped to the
    servo range and the clamp is reported on the returned value.
    """
    crop = cal.crop
    theta_x = cal.theta_x_ref - (marker.x / (crop.width / 2.0)) * cal.theta_x_max
    theta_y = cal.theta_y_ref - (marker.y / (crop.height / 2.0)) * cal.theta_y_max
    cx = min(max(theta_x, cal.servo_min), cal.servo_max)
    cy = min(max(theta_y, cal.servo_min), cal.servo_max)
    return PanTiltAngles(cx, cy, clamped=(cx != theta_x or cy != theta_y))


def invert_pan_tilt(angles: PanTiltAngles, cal: CalibrationProfile) -> CenteredPoint:
    """Exact algebraic inverse of compute_pan_tilt (unclamped branch).

    Used by the simulator's beam model to recover the crop-plane point a
    given servo pose is aimed at.
    """
    if cal.theta_x_max == 0 or cal.theta_y_max == 0:
        raise NotInvertible("zero angular half-span")
    x = (cal.theta_x_ref - angles.theta_x) / cal.theta_x_max * (cal.crop.width / 2.0)
    y = (cal.theta_y_ref - angles.theta_y) / cal.theta_y_max * (cal.crop.height / 2.0)
    return CenteredPoint(x, y)


def average_centers(centers: list[tuple[float, float]], min_count: int = 1) -> tuple[float, float]:
    """Arithmetic mean of detected centers; tolerates missed frames.

    Raises NoDetection when fewer than min_count centers are available.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    if len(centers) < min_count:
        raise NoDetection(f"{len(centers)} detections, need at least {min_count}")
    n = len(centers)
    return (sum(c[0] for c in centers) / n, sum(c[1] for c in centers) / n)


_REQUIRED_FIELDS = {
    "crop_start_x": int, "crop_start_y": int,
    "crop_width": int, "crop_height": int,
    "theta_x_ref": float, "theta_y_ref": float,
    "theta_x_max": float, "theta_y_max": float,
    "servo_min": float, "servo_max": float,
}


def load_calibration(text: str) -> CalibrationProfile:
    """Parse a calibration document (INI-style [calibration] section).

    Every field is required, including the schema version; there are no
    implicit defaults for angle values.
    """
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"malformed calibration document: {exc}") from exc
    if not parser.has_section("calibration"):
        raise ParseError("missing [calibration] section")
    section = parser["calibration"]
    if "version" not in section:
        raise ParseError("missing required field 'version'")
    try:
        version = int(section["version"])
    except ValueError as exc:
        raise ParseError("field 'version' must be an integer") from exc
    if version != CALIBRATION_SCHEMA_VERSION:
        raise ParseError(f"unsupported calibration schema version {version}")

    values = {}
    for field, conv in _REQUIRED_FIELDS.items():
        if field not in section:
            raise ParseError(f"missing required field {field!r}")
        try:
            values[field] = conv(section[field])
        except ValueError as exc:
            raise ParseError(f"field {field!r} is not a valid {conv.__name__}") from exc

    crop = CropRegion(values["crop_start_x"], values["crop_start_y"],
                      values["crop_width"], values["crop_height"])
    return CalibrationProfile(
        crop=crop,
        theta_x_ref=values["theta_x_ref"], theta_y_ref=values["theta_y_ref"],
        theta_x_max=values["theta_x_max"], theta_y_max=values["theta_y_max"],
        servo_min=values["servo_min"], servo_max=values["servo_max"],
    )


def load_calibration_file(path: str) -> CalibrationProfile:
    with open(path, "r", encoding="utf-8") as handle:
        return load_calibration(handle.read())
