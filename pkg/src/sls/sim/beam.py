"""Beam model: where the light actually points, in crop-plane pixels.

Exact inverse of the pixel->angle mapping applied to the servo's current
(not target) angles, plus optional aim noise for robustness studies.
"""

from __future__ import annotations

import numpy as np

from ..geometry import CalibrationProfile, PanTiltAngles, invert_pan_tilt
from .servo import ServoModel

__all__ = ["beam_aim_point"]


def beam_aim_point(servo: ServoModel, cal: CalibrationProfile,
                   aim_noise_px: float = 0.0,
                   rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Crop-plane pixel coordinates the beam currently illuminates."""
    centered = invert_pan_tilt(PanTiltAngles(servo.current_x, servo.current_y), cal)
    x = centered.x + cal.crop.width / 2.0
    y = centered.y + cal.crop.height / 2.0
    if aim_noise_px > 0:
        if rng is None:
            rng = np.random.default_rng()
        x += rng.normal(0.0, aim_noise_px)
        y += rng.normal(0.0, aim_noise_px)
    return x, y
