"""Simulated scene and camera, plus detector wrappers used by the rig.

The scene lives in crop-plane coordinates (2D): marker position and radius
in cropped-image pixels. The camera renders what the real module would see
after cropping. PerfectDetector reads ground truth straight from the scene;
DropoutDetector makes any detector miss a frame with a given probability
(the knob behind the three-frame miss-probability study).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..detection import Detection
from ..frames import Frame, render_marker_frame
from ..geometry import CropRegion
from .montecarlo import sample_frame_detected

__all__ = ["Scene", "SimCamera", "PerfectDetector", "DropoutDetector"]


@dataclass
class Scene:
    """Mutable world state the scenario engine manipulates."""

    marker: tuple[float, float, float] | None = None  # cx, cy, radius (crop px)
    occluded: bool = False
    background: str = "plain"
    background_seed: int = 0
    illumination_gain: float = 1.0
    noise_sigma: float = 0.0

    def place_marker(self, cx: float, cy: float, radius: float):
        if radius <= 0:
            raise ValueError("marker radius must be > 0")
        self.marker = (cx, cy, radius)

    def remove_marker(self):
        self.marker = None

    @property
    def visible_marker(self) -> tuple[float, float, float] | None:
        return None if self.occluded else self.marker


class SimCamera:
    """Renders the scene deterministically; each capture varies the noise
    seed so the three shots of a trigger are distinct but replayable."""

    def __init__(self, scene: Scene, crop: CropRegion, seed: int = 0):
        self.scene = scene
        self.crop = crop
        self._seed = seed
        self._captures = 0

    def capture(self, timestamp_s: float = 0.0) -> Frame:
        scene = self.scene
        frame_seed = (self._seed * 1_000_003 + self._captures) & 0x7FFFFFFF
        self._captures += 1
        return render_marker_frame(
            self.crop.width, self.crop.height,
            scene.visible_marker,
            background=scene.background,
            illumination_gain=scene.illumination_gain,
            noise_sigma=scene.noise_sigma,
            seed=frame_seed if scene.background == "plain" else scene.background_seed,
            timestamp_ms=timestamp_s * 1000.0,
        )


class PerfectDetector:
    """Oracle detector: reports the scene's true marker center exactly."""

    def __init__(self, scene: Scene):
        self.scene = scene

    def __call__(self, frame: Frame) -> Detection | None:
        marker = self.scene.visible_marker
        if marker is None:
            return None
        cx, cy, radius = marker
        r = int(np.ceil(radius))
        bbox = (max(int(cx) - r, 0), max(int(cy) - r, 0), 2 * r, 2 * r)
        return Detection(cx, cy, 1.0, bbox)


class DropoutDetector:
    """Wraps a detector with an i.i.d. per-frame miss probability."""

    def __init__(self, detector, dropout: float = 0.0, seed: int = 0):
        if not 0.0 <= dropout <= 1.0:
            raise ValueError("dropout must be in [0, 1]")
        self._detector = detector
        self.dropout = dropout
        self._rng = np.random.default_rng(seed)

    def __call__(self, frame: Frame) -> Detection | None:
        if not sample_frame_detected(self._rng, 1.0 - self.dropout):
            return None
        return self._detector(frame)
