"""Synthetic marker dataset: generation with exact ground truth, evaluation.

The generator renders the same shaded blue disc the simulator uses, over
varied backgrounds, positions, radii, lighting gains, and mild sensor
noise. Because it knows the true center of every disc it doubles as the
labeling oracle for detector evaluation. Default split 132/50/30 (212
images total).

Directory layout:
    <root>/images/<split>_<index>.png
    <root>/manifest.txt      one line per image: path cx cy radius split

Generation is single-threaded and deterministic by seed: the same seed
produces byte-identical PNG files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .detection import Detection, DetectorSpec, make_detector
from .frames import Frame, render_marker_frame

__all__ = [
    "DatasetEntry", "DatasetManifest", "SplitMetrics",
    "MissingDataset",
    "DEFAULT_COUNTS", "DEFAULT_IMAGE_SIZE",
    "generate_dataset", "load_manifest", "evaluate_detector",
]

DEFAULT_COUNTS = {"train": 132, "test": 50, "validation": 30}
DEFAULT_IMAGE_SIZE = (320, 240)
MANIFEST_HEADER = "# sls-dataset v1"


class MissingDataset(FileNotFoundError):
    """Dataset directory, manifest, or requested split is absent/empty."""


@dataclass(frozen=True)
class DatasetEntry:
    path: str  # relative to the dataset root
    cx: float
    cy: float
    radius: float
    split: str


@dataclass(frozen=True)
class DatasetManifest:
    root: str
    entries: tuple[DatasetEntry, ...]

    @property
    def total(self) -> int:
        return len(self.entries)

    def count(self, split: str) -> int:
        return sum(1 for e in self.entries if e.split == split)

    def split_entries(self, split: str) -> list[DatasetEntry]:
        return [e for e in self.entries if e.split == split]


@dataclass
class SplitMetrics:
    split: str
    images: int
    detected: int = 0
    correct: int = 0
    false_positives: int = 0
    centroid_errors: list[float] = field(default_factory=list)

    @property
    def recall(self) -> float:
        return self.correct / self.images if self.images else 0.0

    @property
    def mean_centroid_error(self) -> float:
        return float(np.mean(self.centroid_errors)) if self.centroid_errors else float("nan")

    def as_dict(self) -> dict:
        return {
            "split": self.split,
            "images": self.images,
            "detected": self.detected,
            "correct": self.correct,
            "false_positives": self.false_positives,
            "recall": round(self.recall, 6),
            "mean_centroid_error_px": (round(self.mean_centroid_error, 6)
                                       if self.centroid_errors else None),
        }


def generate_dataset(out_dir: str, seed: int = 0,
                     counts: dict[str, int] | None = None,
                     image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE) -> DatasetManifest:
    """Render the synthetic dataset and write images plus the manifest index."""
    counts = dict(DEFAULT_COUNTS if counts is None else counts)
    for split, n in counts.items():
        if n <= 0:
            raise ValueError(f"count for split {split!r} must be positive")
    width, height = image_size
    rng = np.random.default_rng(seed)
    images_dir = os.path.join(out_dir, "images")
    try:
        os.makedirs(images_dir, exist_ok=True)
    except OSError as exc:
        raise IOError(f"cannot create dataset directory {out_dir}: {exc}") from exc

    entries: list[DatasetEntry] = []
    for split in sorted(counts):
        for index in range(counts[split]):
            # Projected 3 cm sphere at varying working distances.
            radius = float(rng.uniform(6.0, 28.0))
            cx = float(rng.uniform(radius + 2.0, width - radius - 2.0))
            cy = float(rng.uniform(radius + 2.0, height - radius - 2.0))
            gain = float(rng.uniform(0.75, 1.25))
            background = "textured" if rng.random() < 0.6 else "plain"
            light_angle = rng.uniform(0, 2 * np.pi)
            frame_seed = int(rng.integers(0, 2**31 - 1))
            frame = render_marker_frame(
                width, height, (cx, cy, radius),
                background=background,
                illumination_gain=gain,
                noise_sigma=float(rng.uniform(1.0, 4.0)),
                seed=frame_seed,
                light_dir=(float(np.cos(light_angle)), float(np.sin(light_angle))),
            )
            rel_path = os.path.join("images", f"{split}_{index:04d}.png")
            try:
                Image.fromarray(frame.pixels).save(os.path.join(out_dir, rel_path))
            except OSError as exc:
                raise IOError(f"cannot write {rel_path}: {exc}") from exc
            entries.append(DatasetEntry(rel_path, cx, cy, radius, split))

    manifest = DatasetManifest(out_dir, tuple(entries))
    lines = [MANIFEST_HEADER]
    lines += [f"{e.path} {e.cx:.4f} {e.cy:.4f} {e.radius:.4f} {e.split}"
              for e in entries]
    try:
        with open(os.path.join(out_dir, "manifest.txt"), "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IOError(f"cannot write manifest: {exc}") from exc
    return manifest


def load_manifest(root: str) -> DatasetManifest:
    manifest_path = os.path.join(root, "manifest.txt")
    if not os.path.isfile(manifest_path):
        raise MissingDataset(f"no manifest at {manifest_path}")
    entries = []
    with open(manifest_path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            path, cx, cy, radius, split = line.split()
            entries.append(DatasetEntry(path, float(cx), float(cy), float(radius), split))
    return DatasetManifest(root, tuple(entries))


def _load_frame(root: str, rel_path: str) -> Frame:
    full = os.path.join(root, rel_path)
    if not os.path.isfile(full):
        raise MissingDataset(f"image missing: {full}")
    with Image.open(full) as img:
        return Frame(np.asarray(img.convert("RGB"), dtype=np.uint8))


def evaluate_detector(spec: DetectorSpec, manifest: DatasetManifest, split: str,
                      tolerance_px: float | None = None) -> SplitMetrics:
    """Per-split detector metrics against the generator's ground truth.

    A detection counts as correct when its center lies within tolerance_px
    of the true center (default: that image's disc radius). A detection
    farther out than the tolerance counts as a false positive.
    """
    entries = manifest.split_entries(split)
    if not entries:
        raise MissingDataset(f"split {split!r} has no images")
    detector = make_detector(spec)
    metrics = SplitMetrics(split=split, images=len(entries))
    for entry in entries:
        frame = _load_frame(manifest.root, entry.path)
        result: Detection | None = detector(frame)
        if result is None:
            continue
        metrics.detected += 1
        error = float(np.hypot(result.center_x - entry.cx, result.center_y - entry.cy))
        tol = entry.radius if tolerance_px is None else tolerance_px
        if error <= tol:
            metrics.correct += 1
            metrics.centroid_errors.append(error)
        else:
            metrics.false_positives += 1
    return metrics
