"""Marker detection: pluggable contract plus the reference HSV blob detector.

The reference detector is a deterministic stand-in for a neural detector.
Pipeline: RGB -> HSV, threshold mask (hue window, min saturation, min
value), 4-connected components, reject small or non-circular components,
report the centroid of the largest survivor. Blue is not naturally present
in the modeled scenes, which is what makes a plain color detector adequate.
"""

from __future__ import annotations

import math
import socket
import struct
import threading
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .frames import Frame

__all__ = [
    "Detection",
    "BlobParams",
    "DetectorSpec",
    "BadFrame",
    "rgb_to_hsv",
    "reference_blob_detect",
    "detect",
    "make_detector",
    "ExternalDetectorClient",
    "ExternalDetectorServer",
    "EXTDET_PROTOCOL_VERSION",
]


class BadFrame(ValueError):
    """Frame dimensions do not match the calibration crop."""


@dataclass(frozen=True)
class Detection:
    """Marker center in cropped-image pixels plus a confidence in [0, 1]."""

    center_x: float
    center_y: float
    confidence: float
    bbox: tuple[int, int, int, int]  # x, y, w, h


@dataclass(frozen=True)
class BlobParams:
    """Thresholds for the reference blob detector.

    Defaults cover pure and shaded blues while excluding skin/tissue hues.
    """

    hue_min: float = 200.0
    hue_max: float = 260.0
    sat_min: float = 0.45
    val_min: float = 0.25
    min_area: int = 12
    min_circularity: float = 0.6

    def __post_init__(self):
        if not (0 <= self.hue_min < 360 and 0 <= self.hue_max < 360):
            raise ValueError("hue range must lie within [0, 360)")
        if self.min_area < 1:
            raise ValueError("min_area must be >= 1")


@dataclass(frozen=True)
class DetectorSpec:
    """Which detector to run: the built-in blob detector or an external one."""

    kind: str = "reference_blob"  # "reference_blob" | "external"
    blob: BlobParams = BlobParams()
    external_endpoint: tuple[str, int] | None = None


def rgb_to_hsv(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized hexcone RGB->HSV; hue in degrees [0, 360), s and v in [0, 1]."""
    arr = rgb.astype(np.float64) / 255.0
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    delta = maxc - minc
    hue = np.zeros_like(maxc)
    nz = delta > 0
    rmax = nz & (maxc == r)
    gmax = nz & (maxc == g) & ~rmax
    bmax = nz & ~rmax & ~gmax
    hue[rmax] = ((g[rmax] - b[rmax]) / delta[rmax]) % 6.0
    hue[gmax] = (b[gmax] - r[gmax]) / delta[gmax] + 2.0
    hue[bmax] = (r[bmax] - g[bmax]) / delta[bmax] + 4.0
    hue *= 60.0
    sat = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    return hue, sat, maxc


_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def _crack_perimeter(mask: np.ndarray) -> int:
    """Count exposed pixel edges of a binary component (4-neighbourhood)."""
    padded = np.pad(mask, 1)
    edges = 0
    edges += int(np.count_nonzero(padded[1:, :] != padded[:-1, :]))
    edges += int(np.count_nonzero(padded[:, 1:] != padded[:, :-1]))
    return edges


def reference_blob_detect(frame: Frame, params: BlobParams = BlobParams()) -> Detection | None:
    """Run the HSV blob pipeline; absence of a marker is a value, not an error."""
    hue, sat, val = rgb_to_hsv(frame.pixels)
    if params.hue_min <= params.hue_max:
        hue_ok = (hue >= params.hue_min) & (hue <= params.hue_max)
    else:  # window wraps through 0
        hue_ok = (hue >= params.hue_min) | (hue <= params.hue_max)
    mask = hue_ok & (sat >= params.sat_min) & (val >= params.val_min)
    if not mask.any():
        return None

    labels, count = ndimage.label(mask, structure=_FOUR_CONNECTED)
    best: tuple[int, int] | None = None  # (area, label)
    areas = ndimage.sum_labels(np.ones_like(labels), labels, index=range(1, count + 1))
    for label_idx, area in enumerate(areas, start=1):
        area = int(area)
        if area < params.min_area:
            continue
        component = labels == label_idx
        perimeter = _crack_perimeter(component)
        # pi/4 corrects the staircase overestimate of axis-aligned edges.
        circularity = 4.0 * math.pi * area / (perimeter * math.pi / 4.0) ** 2
        if circularity < params.min_circularity:
            continue
        if best is None or area > best[0]:
            best = (area, label_idx)
    if best is None:
        return None

    component = labels == best[1]
    ys, xs = np.nonzero(component)
    cx = float(xs.mean() + 0.5)
    cy = float(ys.mean() + 0.5)
    x0, x1 = int(xs.min()), int(xs.max())
    y0, y1 = int(ys.min()), int(ys.max())
    bbox = (x0, y0, x1 - x0 + 1, y1 - y0 + 1)
    confidence = min(1.0, best[0] / (bbox[2] * bbox[3]))
    return Detection(cx, cy, confidence, bbox)


def detect(frame: Frame, spec: DetectorSpec,
           crop_width: int | None = None, crop_height: int | None = None) -> Detection | None:
    """Dispatch to the configured detector, checking crop dimensions first."""
    if crop_width is not None and (frame.width != crop_width or frame.height != crop_height):
        raise BadFrame(f"frame {frame.width}x{frame.height} does not match "
                       f"crop {crop_width}x{crop_height}")
    return make_detector(spec)(frame)


def make_detector(spec: DetectorSpec):
    """Build a `Frame -> Detection | None` callable from a spec."""
    if spec.kind == "reference_blob":
        params = spec.blob
        return lambda frame: reference_blob_detect(frame, params)
    if spec.kind == "external":
        if spec.external_endpoint is None:
            raise ValueError("external detector spec needs an endpoint")
        client = ExternalDetectorClient(*spec.external_endpoint)
        return client.detect
    raise ValueError(f"unknown detector kind {spec.kind!r}")


# --- external detector process boundary -----------------------------------
#
# Length-prefixed frames over a stream socket; schema version byte first.
#   request : u32 length | u8 version | u16 width | u16 height | raw RGB bytes
#   response: u32 length | u8 version | u8 found | f64 cx | f64 cy | f64 conf
# All integers and floats big-endian.

EXTDET_PROTOCOL_VERSION = 1


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("external detector connection closed")
        buf += chunk
    return buf


class ExternalDetectorClient:
    """Talks to an out-of-process detector over the documented socket protocol."""

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self._addr = (host, port)
        self._timeout = timeout
        self._sock: socket.socket | None = None
        self._lock = threading.Lock()

    def _connect(self) -> socket.socket:
        if self._sock is None:
            self._sock = socket.create_connection(self._addr, timeout=self._timeout)
        return self._sock

    def detect(self, frame: Frame) -> Detection | None:
        body = struct.pack(">BHH", EXTDET_PROTOCOL_VERSION, frame.width, frame.height)
        body += frame.pixels.tobytes()
        with self._lock:
            sock = self._connect()
            sock.sendall(struct.pack(">I", len(body)) + body)
            (length,) = struct.unpack(">I", _recv_exact(sock, 4))
            payload = _recv_exact(sock, length)
        version, found, cx, cy, conf = struct.unpack(">BBddd", payload)
        if version != EXTDET_PROTOCOL_VERSION:
            raise ValueError(f"unsupported detector protocol version {version}")
        if not found:
            return None
        bbox = (int(cx), int(cy), 1, 1)  # external protocol carries no bbox
        return Detection(cx, cy, conf, bbox)

    def close(self):
        with self._lock:
            if self._sock is not None:
                self._sock.close()
                self._sock = None


class ExternalDetectorServer:
    """Serves a `Frame -> Detection | None` callable over the socket protocol.

    This is the seam where a real (e.g. neural) detector process would sit;
    tests run it on a thread around the reference blob detector.
    """

    def __init__(self, detector, host: str = "127.0.0.1", port: int = 0):
        self._detector = detector
        self._server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._server.bind((host, port))
        self._server.listen(4)
        self._server.settimeout(0.2)
        self.port: int = self._server.getsockname()[1]
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def _handle(self, conn: socket.socket):
        try:
            while True:
                (length,) = struct.unpack(">I", _recv_exact(conn, 4))
                payload = _recv_exact(conn, length)
                version, width, height = struct.unpack(">BHH", payload[:5])
                if version != EXTDET_PROTOCOL_VERSION:
                    break
                pixels = np.frombuffer(payload[5:], dtype=np.uint8).reshape(height, width, 3)
                result = self._detector(Frame(pixels.copy()))
                if result is None:
                    body = struct.pack(">BBddd", EXTDET_PROTOCOL_VERSION, 0, 0.0, 0.0, 0.0)
                else:
                    body = struct.pack(">BBddd", EXTDET_PROTOCOL_VERSION, 1,
                                       result.center_x, result.center_y, result.confidence)
                conn.sendall(struct.pack(">I", len(body)) + body)
        except (ConnectionError, struct.error):
            pass
        finally:
            conn.close()

    def _serve(self):
        try:
            while not self._stop.is_set():
                try:
                    conn, _ = self._server.accept()
                except socket.timeout:
                    continue
                threading.Thread(target=self._handle, args=(conn,), daemon=True).start()
        finally:
            self._server.close()

    def start(self) -> "ExternalDetectorServer":
        self._thread = threading.Thread(target=self._serve, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
