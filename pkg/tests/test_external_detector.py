import pytest

from sls.detection import (DetectorSpec, ExternalDetectorClient,
                           ExternalDetectorServer, make_detector,
                           reference_blob_detect)
from sls.frames import render_marker_frame


@pytest.fixture()
def blob_server():
    server = ExternalDetectorServer(reference_blob_detect).start()
    yield server
    server.stop()


def test_round_trip_detection(blob_server):
    client = ExternalDetectorClient("127.0.0.1", blob_server.port)
    frame = render_marker_frame(64, 64, (20.0, 30.0, 5.0))
    det = client.detect(frame)
    assert det is not None
    assert det.center_x == pytest.approx(20.0, abs=0.5)
    assert det.center_y == pytest.approx(30.0, abs=0.5)
    client.close()


def test_absent_marker_over_the_wire(blob_server):
    client = ExternalDetectorClient("127.0.0.1", blob_server.port)
    frame = render_marker_frame(64, 64, None)
    assert client.detect(frame) is None
    client.close()


def test_external_spec_dispatch(blob_server):
    spec = DetectorSpec(kind="external",
                        external_endpoint=("127.0.0.1", blob_server.port))
    detector = make_detector(spec)
    frame = render_marker_frame(64, 64, (40.0, 12.0, 6.0))
    det = detector(frame)
    assert det is not None
    assert det.center_x == pytest.approx(40.0, abs=0.5)


def test_multiple_requests_reuse_connection(blob_server):
    client = ExternalDetectorClient("127.0.0.1", blob_server.port)
    for cx in (10.0, 30.0, 50.0):
        frame = render_marker_frame(64, 64, (cx, 32.0, 5.0))
        det = client.detect(frame)
        assert det is not None
        assert det.center_x == pytest.approx(cx, abs=0.5)
    client.close()
