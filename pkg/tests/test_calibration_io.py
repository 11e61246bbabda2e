from pathlib import Path

import pytest

from sls.geometry import (InvalidProfile, ParseError, load_calibration,
                          load_calibration_file)

VALID = """
[calibration]
version = 1
crop_start_x = 0
crop_start_y = 0
crop_width = 640
crop_height = 480
theta_x_ref = 90
theta_y_ref = 90
theta_x_max = 30
theta_y_max = 20
servo_min = 0
servo_max = 180
"""


def test_valid_document_loads_default_profile():
    cal = load_calibration(VALID)
    assert cal.crop.width == 640
    assert cal.theta_x_max == 30.0
    assert cal.theta_y_ref == 90.0


def test_zero_half_span_is_invalid_profile():
    doc = VALID.replace("theta_x_max = 30", "theta_x_max = 0")
    with pytest.raises(InvalidProfile) as err:
        load_calibration(doc)
    assert "theta_x_max" in str(err.value)


def test_missing_field_is_parse_error():
    doc = VALID.replace("theta_y_ref = 90\n", "")
    with pytest.raises(ParseError) as err:
        load_calibration(doc)
    assert "theta_y_ref" in str(err.value)


def test_missing_version_is_parse_error():
    doc = VALID.replace("version = 1\n", "")
    with pytest.raises(ParseError):
        load_calibration(doc)


def test_unknown_version_rejected():
    doc = VALID.replace("version = 1", "version = 99")
    with pytest.raises(ParseError):
        load_calibration(doc)


def test_garbage_is_parse_error():
    with pytest.raises(ParseError):
        load_calibration("not an ini file [[[")


def test_non_numeric_field_is_parse_error():
    doc = VALID.replace("crop_width = 640", "crop_width = wide")
    with pytest.raises(ParseError):
        load_calibration(doc)


def test_shipped_calibration_file_is_valid():
    path = Path(__file__).resolve().parents[1] / "config" / "calibration.ini"
    cal = load_calibration_file(str(path))
    assert cal.servo_max == 180.0
