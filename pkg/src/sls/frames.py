"""Frame container and synthetic marker rendering.

The renderer is the ground-truth oracle for the detector: it places a blue
disc at a known subpixel center, so detector accuracy can be measured
without hand labeling. Rendering is deterministic for a given seed.

Pixel-center convention: the pixel at row r, column c covers the unit square
[c, c+1) x [r, r+1) and is sampled at (c + 0.5, r + 0.5). A disc "at (cx, cy)"
means its true centroid sits at those continuous coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Frame", "render_marker_frame", "MARKER_RGB"]

# Base marker color: R == G keeps the hue at exactly 240 degrees under
# radial shading, comfortably inside the default detector hue window.
MARKER_RGB = (30, 30, 255)


@dataclass(frozen=True)
class Frame:
    """Raw RGB image plus capture timestamp (ms since controller start)."""

    pixels: np.ndarray  # uint8, shape (height, width, 3), row-major RGB
    timestamp_ms: float = 0.0

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError("pixels must have shape (height, width, 3)")
        if self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be uint8")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def _background(width: int, height: int, kind: str, rng: np.random.Generator,
                gain: float) -> np.ndarray:
    """Low-saturation background; never blue so negatives stay negative."""
    if kind == "plain":
        base = np.full((height, width, 3), 120.0)
    elif kind == "textured":
        # Coarse random field upsampled for a soft tissue-like texture.
        coarse = rng.uniform(70.0, 170.0, size=(max(height // 16, 2), max(width // 16, 2)))
        reps_y = -(-height // coarse.shape[0])
        reps_x = -(-width // coarse.shape[1])
        lum = np.kron(coarse, np.ones((reps_y, reps_x)))[:height, :width]
        tint = rng.uniform(0.85, 1.15, size=3)
        tint[2] = min(tint[2], min(tint[0], tint[1]))  # keep blue channel lowest
        base = lum[:, :, None] * tint[None, None, :]
    else:
        raise ValueError(f"unknown background kind {kind!r}")
    return base * gain


def render_marker_frame(width: int, height: int,
                        marker: tuple[float, float, float] | None,
                        *,
                        background: str = "plain",
                        illumination_gain: float = 1.0,
                        noise_sigma: float = 0.0,
                        seed: int = 0,
                        light_dir: tuple[float, float] = (0.0, 0.0),
                        timestamp_ms: float = 0.0) -> Frame:
    """Render a frame with an optional shaded blue disc.

    marker is (cx, cy, radius) in pixels or None for a marker-absent frame.
    light_dir adds a mild directional shading term (unit-ish vector); the
    default is straight overhead, which keeps the brightness radially
    symmetric so centroiding oracles are unbiased.
    """
    rng = np.random.default_rng(seed)
    img = _background(width, height, background, rng, illumination_gain)

    if marker is not None:
        cx, cy, radius = marker
        if radius <= 0:
            raise ValueError("marker radius must be > 0")
        ys, xs = np.mgrid[0:height, 0:width]
        dx = (xs + 0.5) - cx
        dy = (ys + 0.5) - cy
        dist = np.sqrt(dx * dx + dy * dy)
        # 1px anti-aliased edge.
        coverage = np.clip(radius - dist + 0.5, 0.0, 1.0)
        inside = coverage > 0
        # Sphere-like radial shading plus a small directional component.
        rel = np.clip(dist / radius, 0.0, 1.0)
        shade = 0.55 + 0.45 * np.sqrt(np.clip(1.0 - rel * rel, 0.0, 1.0))
        lx, ly = light_dir
        if lx or ly:
            shade = shade + 0.08 * (dx * lx + dy * ly) / radius
        shade = np.clip(shade * illumination_gain, 0.3, 1.0)
        color = np.array(MARKER_RGB, dtype=float)
        disc = shade[:, :, None] * color[None, None, :]
        cov = coverage[:, :, None]
        img = np.where(inside[:, :, None], (1.0 - cov) * img + cov * disc, img)

    if noise_sigma > 0:
        img = img + rng.normal(0.0, noise_sigma * illumination_gain, size=img.shape)

    return Frame(np.clip(img, 0, 255).astype(np.uint8), timestamp_ms=timestamp_ms)
