import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sls.detection import (BadFrame, BlobParams, DetectorSpec, detect,
                           reference_blob_detect, rgb_to_hsv)
from sls.frames import Frame, render_marker_frame


def solid_frame(rgb, size=64):
    return Frame(np.full((size, size, 3), rgb, dtype=np.uint8))


class TestRgbToHsv:
    def test_pure_blue(self):
        h, s, v = rgb_to_hsv(np.array([[[0, 0, 255]]], dtype=np.uint8))
        assert h[0, 0] == 240.0
        assert s[0, 0] == 1.0
        assert v[0, 0] == 1.0

    def test_primaries_and_gray(self):
        pixels = np.array([[[255, 0, 0], [0, 255, 0], [128, 128, 128]]], dtype=np.uint8)
        h, s, v = rgb_to_hsv(pixels)
        assert h[0, 0] == 0.0
        assert h[0, 1] == 120.0
        assert s[0, 2] == 0.0  # gray carries no hue

    @given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
    def test_matches_colorsys(self, r, g, b):
        import colorsys
        h, s, v = rgb_to_hsv(np.array([[[r, g, b]]], dtype=np.uint8))
        eh, es, ev = colorsys.rgb_to_hsv(r / 255, g / 255, b / 255)
        assert h[0, 0] == pytest.approx(eh * 360 % 360, abs=1e-9)
        assert s[0, 0] == pytest.approx(es, abs=1e-9)
        assert v[0, 0] == pytest.approx(ev, abs=1e-9)


class TestReferenceBlobDetect:
    def test_centered_disc_recovered(self):
        frame = render_marker_frame(64, 64, (20.0, 30.0, 5.0))
        det = reference_blob_detect(frame)
        assert det is not None
        assert abs(det.center_x - 20.0) <= 0.5
        assert abs(det.center_y - 30.0) <= 0.5

    def test_all_black_frame_absent(self):
        assert reference_blob_detect(solid_frame((0, 0, 0))) is None

    def test_largest_component_wins(self):
        big = render_marker_frame(64, 64, (20.0, 20.0, 8.0))
        small = render_marker_frame(64, 64, (48.0, 48.0, 3.0))
        pixels = big.pixels.copy()
        mask = small.pixels[:, :, 2] > 150
        pixels[mask] = small.pixels[mask]
        det = reference_blob_detect(Frame(pixels))
        assert det is not None
        assert abs(det.center_x - 20.0) <= 0.5
        assert abs(det.center_y - 20.0) <= 0.5

    def test_tiny_disc_below_min_area_absent(self):
        frame = render_marker_frame(64, 64, (30.0, 30.0, 1.0))
        assert reference_blob_detect(frame) is None

    def test_confidence_in_unit_interval_and_center_in_bbox(self):
        frame = render_marker_frame(64, 64, (40.0, 12.0, 6.0))
        det = reference_blob_detect(frame)
        assert det is not None
        assert 0.0 <= det.confidence <= 1.0
        x, y, w, h = det.bbox
        assert x <= det.center_x <= x + w
        assert y <= det.center_y <= y + h

    def test_deterministic(self):
        frame = render_marker_frame(96, 96, (33.3, 44.4, 9.0),
                                    background="textured", noise_sigma=3.0, seed=5)
        a = reference_blob_detect(frame)
        b = reference_blob_detect(frame)
        assert a == b

    def test_no_blue_means_no_detection(self):
        # Saturated red, green, and skin-ish tones: all outside the hue window.
        for rgb in ((200, 30, 30), (30, 200, 30), (224, 172, 105)):
            assert reference_blob_detect(solid_frame(rgb)) is None

    def test_empty_hue_range_never_detects(self):
        params = BlobParams(hue_min=10.0, hue_max=10.0)
        frame = render_marker_frame(64, 64, (32.0, 32.0, 8.0))
        assert reference_blob_detect(frame, params) is None

    def test_elongated_blob_rejected_by_circularity(self):
        pixels = np.zeros((64, 64, 3), dtype=np.uint8)
        pixels[30:32, 4:60] = (0, 0, 255)  # 2x56 bar, area 112
        assert reference_blob_detect(Frame(pixels)) is None


@settings(max_examples=25, deadline=None)
@given(st.integers(-20, 20), st.integers(-20, 20))
def test_translation_equivariance(dx, dy):
    base = (40.0, 40.0, 7.0)
    f1 = render_marker_frame(128, 128, base)
    f2 = render_marker_frame(128, 128, (base[0] + dx, base[1] + dy, base[2]))
    d1 = reference_blob_detect(f1)
    d2 = reference_blob_detect(f2)
    assert d1 is not None and d2 is not None
    assert d2.center_x - d1.center_x == pytest.approx(dx, abs=0.1)
    assert d2.center_y - d1.center_y == pytest.approx(dy, abs=0.1)


@pytest.mark.parametrize("radius", [4, 8, 16, 24, 32, 40])
def test_scale_sanity(radius):
    frame = render_marker_frame(128, 128, (64.3, 60.7, float(radius)))
    det = reference_blob_detect(frame)
    assert det is not None
    err = np.hypot(det.center_x - 64.3, det.center_y - 60.7)
    assert err <= 0.5


class TestDetectDispatch:
    def test_dimension_mismatch_raises_bad_frame(self):
        frame = render_marker_frame(64, 64, (32.0, 32.0, 6.0))
        with pytest.raises(BadFrame):
            detect(frame, DetectorSpec(), crop_width=640, crop_height=480)

    def test_matching_dimensions_pass_through(self):
        frame = render_marker_frame(64, 64, (32.0, 32.0, 6.0))
        det = detect(frame, DetectorSpec(), crop_width=64, crop_height=64)
        assert det is not None

    def test_bad_blob_params_rejected(self):
        with pytest.raises(ValueError):
            BlobParams(hue_min=400.0)
        with pytest.raises(ValueError):
            BlobParams(min_area=0)
