import math

import pytest
from hypothesis import given, strategies as st

from sls.geometry import (
    CalibrationProfile,
    CenteredPoint,
    CropRegion,
    InvalidProfile,
    NoDetection,
    OutOfCrop,
    PanTiltAngles,
    average_centers,
    compute_pan_tilt,
    correct_marker_coords,
    default_profile,
    invert_pan_tilt,
)

CAL = default_profile()


class TestCorrectMarkerCoords:
    def test_crop_center_maps_to_zero(self):
        p = correct_marker_coords(320, 240, CAL.crop)
        assert (p.x, p.y) == (0.0, 0.0)

    def test_far_corner(self):
        p = correct_marker_coords(640, 480, CAL.crop)
        assert (p.x, p.y) == (320.0, 240.0)

    def test_direct_substitution(self):
        p = correct_marker_coords(480, 120, CAL.crop)
        assert (p.x, p.y) == (160.0, -120.0)

    def test_out_of_crop_raises(self):
        with pytest.raises(OutOfCrop):
            correct_marker_coords(641, 10, CAL.crop)
        with pytest.raises(OutOfCrop):
            correct_marker_coords(10, -1, CAL.crop)


class TestComputePanTilt:
    def test_center_maps_to_reference(self):
        a = compute_pan_tilt(CenteredPoint(0, 0), CAL)
        assert (a.theta_x, a.theta_y) == (90.0, 90.0)
        assert not a.clamped

    def test_boundary(self):
        a = compute_pan_tilt(CenteredPoint(320, 0), CAL)
        assert (a.theta_x, a.theta_y) == (60.0, 90.0)

    def test_mixed_quadrant(self):
        a = compute_pan_tilt(CenteredPoint(-160, 120), CAL)
        assert (a.theta_x, a.theta_y) == (105.0, 80.0)

    def test_clamping_absorbs_out_of_range_requests(self):
        # A marker far outside the crop half-extent would demand a negative
        # angle; the mapping clamps to the servo limit and reports it.
        a = compute_pan_tilt(CenteredPoint(1100, 0), CAL)
        assert a.clamped
        assert a.theta_x == CAL.servo_min


class TestInvertPanTilt:
    def test_center_case(self):
        p = invert_pan_tilt(PanTiltAngles(90, 90), CAL)
        assert (p.x, p.y) == (0.0, 0.0)

    def test_boundary_case(self):
        p = invert_pan_tilt(PanTiltAngles(60, 90), CAL)
        assert (p.x, p.y) == (320.0, 0.0)

    def test_round_trip_specific_point(self):
        original = CenteredPoint(123.5, -77.25)
        back = invert_pan_tilt(compute_pan_tilt(original, CAL), CAL)
        assert back.x == pytest.approx(original.x, abs=1e-9)
        assert back.y == pytest.approx(original.y, abs=1e-9)


class TestAverageCenters:
    def test_mean_of_three(self):
        assert average_centers([(10, 10), (20, 20), (30, 30)]) == (20, 20)

    def test_one_frame_missed(self):
        assert average_centers([(10, 10), (20, 20)]) == (15, 15)

    def test_empty_raises(self):
        with pytest.raises(NoDetection):
            average_centers([])

    def test_min_count_enforced(self):
        with pytest.raises(NoDetection):
            average_centers([(1, 1)], min_count=2)


# -- property tests -----------------------------------------------------------

profiles = st.builds(
    CalibrationProfile,
    crop=st.builds(CropRegion,
                   start_x=st.integers(0, 100), start_y=st.integers(0, 100),
                   width=st.integers(2, 2000), height=st.integers(2, 2000)),
    theta_x_ref=st.floats(60, 120), theta_y_ref=st.floats(60, 120),
    theta_x_max=st.floats(1, 45), theta_y_max=st.floats(1, 45),
    servo_min=st.just(0.0), servo_max=st.just(180.0),
)


@given(profiles)
def test_center_fixpoint(cal):
    a = compute_pan_tilt(CenteredPoint(0, 0), cal)
    assert a.theta_x == cal.theta_x_ref
    assert a.theta_y == cal.theta_y_ref


@given(profiles)
def test_boundary_law(cal):
    w2, h2 = cal.crop.width / 2, cal.crop.height / 2
    a = compute_pan_tilt(CenteredPoint(w2, h2), cal)
    assert a.theta_x == pytest.approx(cal.theta_x_ref - cal.theta_x_max, abs=1e-9)
    assert a.theta_y == pytest.approx(cal.theta_y_ref - cal.theta_y_max, abs=1e-9)
    b = compute_pan_tilt(CenteredPoint(-w2, -h2), cal)
    assert b.theta_x == pytest.approx(cal.theta_x_ref + cal.theta_x_max, abs=1e-9)
    assert b.theta_y == pytest.approx(cal.theta_y_ref + cal.theta_y_max, abs=1e-9)


@given(profiles, st.floats(-0.5, 0.5), st.floats(-0.5, 0.5),
       st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_linearity_midpoint(cal, fx1, fy1, fx2, fy2):
    w2, h2 = cal.crop.width / 2, cal.crop.height / 2
    p1 = CenteredPoint(fx1 * w2, fy1 * h2)
    p2 = CenteredPoint(fx2 * w2, fy2 * h2)
    mid = CenteredPoint((p1.x + p2.x) / 2, (p1.y + p2.y) / 2)
    a1 = compute_pan_tilt(p1, cal)
    a2 = compute_pan_tilt(p2, cal)
    am = compute_pan_tilt(mid, cal)
    assert am.theta_x == pytest.approx((a1.theta_x + a2.theta_x) / 2, abs=1e-9)
    assert am.theta_y == pytest.approx((a1.theta_y + a2.theta_y) / 2, abs=1e-9)


@given(profiles, st.floats(-0.999, 0.999), st.floats(-0.999, 0.999))
def test_round_trip_identity(cal, fx, fy):
    p = CenteredPoint(fx * cal.crop.width / 2, fy * cal.crop.height / 2)
    back = invert_pan_tilt(compute_pan_tilt(p, cal), cal)
    assert back.x == pytest.approx(p.x, abs=1e-9 * max(1, abs(p.x)))
    assert back.y == pytest.approx(p.y, abs=1e-9 * max(1, abs(p.y)))


@given(profiles, st.floats(-0.9, 0.89))
def test_monotonicity_in_x(cal, fx):
    w2 = cal.crop.width / 2
    a1 = compute_pan_tilt(CenteredPoint(fx * w2, 0), cal)
    a2 = compute_pan_tilt(CenteredPoint((fx + 0.1) * w2, 0), cal)
    assert a2.theta_x < a1.theta_x


@given(st.lists(st.tuples(st.floats(0, 640), st.floats(0, 480)), min_size=1, max_size=6),
       st.randoms())
def test_average_permutation_invariant(points, rnd):
    shuffled = list(points)
    rnd.shuffle(shuffled)
    ax, ay = average_centers(points)
    bx, by = average_centers(shuffled)
    assert math.isclose(ax, bx, abs_tol=1e-9)
    assert math.isclose(ay, by, abs_tol=1e-9)


@given(st.tuples(st.floats(0, 640), st.floats(0, 480)), st.integers(1, 5))
def test_average_idempotent_on_identical_points(point, n):
    ax, ay = average_centers([point] * n)
    assert ax == pytest.approx(point[0])
    assert ay == pytest.approx(point[1])


def test_profile_rejects_zero_half_span():
    with pytest.raises(InvalidProfile):
        CalibrationProfile(crop=CropRegion(0, 0, 640, 480),
                           theta_x_ref=90, theta_y_ref=90,
                           theta_x_max=0, theta_y_max=20)


def test_profile_rejects_unreachable_crop():
    with pytest.raises(InvalidProfile):
        CalibrationProfile(crop=CropRegion(0, 0, 640, 480),
                           theta_x_ref=170, theta_y_ref=90,
                           theta_x_max=30, theta_y_max=20)
