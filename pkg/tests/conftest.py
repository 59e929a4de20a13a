"""Shared fixtures: data paths, sequence builders, a mock chat server,
and the canonical coach-reply text used by the compliance tests."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import numpy as np
import pytest

from kinecoach.grounding import RangeEntry, ReferenceTable
from kinecoach.skeleton_io import SkeletonSequence

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def stroke_csv():
    return DATA_DIR / "synthetic_stroke.csv"


@pytest.fixture
def stroke_json():
    return DATA_DIR / "synthetic_stroke_b.json"


@pytest.fixture
def cohort_csv():
    return DATA_DIR / "cohort_12v12.csv"


def make_sequence(joint_arrays, rate=60.0, source="test"):
    """Build a SkeletonSequence directly from name -> (T, 3) arrays."""
    joints = tuple(joint_arrays)
    arrays = [np.asarray(joint_arrays[j], dtype=np.float64) for j in joints]
    T = arrays[0].shape[0]
    positions = np.stack(arrays, axis=1)
    return SkeletonSequence(
        joints=joints,
        positions=positions,
        sample_rate_hz=rate,
        source_id=source,
        imputed=np.zeros((T, len(joints)), dtype=bool),
    )


def make_table(stroke, **intervals):
    """ReferenceTable for one stroke from feature=(lo, hi) kwargs."""
    entry = {
        feature: RangeEntry(lo=float(lo), hi=float(hi))
        for feature, (lo, hi) in intervals.items()
    }
    return ReferenceTable(strokes={stroke.lower(): entry})


# --- canonical backhand scenario: rotation HIGH, duration LOW, ---------
# --- peak angular velocity LOW, racket velocity OK ----------------------

BACKHAND_SCALARS = {
    "predicted_stroke": "backhand",
    "racket_velocity_max": 24.0,
    "peak_power": 950.0,
    "rotation_range_deg": 150.0,
    "stroke_duration_frames": 22,
    "stroke_duration_s": 22 / 60.0,
    "peak_angular_velocity": 4.2,
    "impact_timing_pct": 52.0,
    "kinetic_chain_timing_pct": 80.0,
    "metadata": {"sample_rate_hz": 60.0},
}


def backhand_table():
    return make_table(
        "backhand",
        racket_velocity_max=(22, 32),
        rotation_range_deg=(70, 130),
        stroke_duration_frames=(30, 90),
        peak_angular_velocity=(7, 14),
    )


COACH_REPLY = """Overall Score: 4/10
Metrics outside optimal range:
• Rotation range (°): HIGH – significantly excessive.
• Stroke duration (frames at 60fps): LOW – considerably shorter than optimal.
• Peak angular velocity (rad/s): LOW – substantially below the optimal range.
Diagnosis: The backhand stroke is characterized by an excessively large rotation range, leading to a significantly shortened stroke duration and reduced peak angular velocity. This suggests a loss of power and control due to inefficient movement.
Actionable Corrections:
1. Reduce the backswing rotation to a more compact range, focusing on generating power through the core and legs rather than relying on excessive arm swing.
2. Increase the stroke duration by slowing down the swing initiation and focusing on a smoother, more controlled acceleration through the ball.
3. Improve the sequencing of the swing to increase peak angular velocity, ensuring a more powerful and efficient transfer of energy from the lower body to the racket head.
"""


class _MockChatHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        self.server.requests.append(json.loads(body))
        status = self.server.response_status
        if status == 200:
            payload = json.dumps(
                {"choices": [{"message": {"content": self.server.response_text}}]}
            ).encode()
        else:
            payload = b'{"error": "boom"}'
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


class MockChatServer:
    """Tiny OpenAI-compatible endpoint for failure-mode tests."""

    def __init__(self, status=200, text="ok"):
        self.httpd = HTTPServer(("127.0.0.1", 0), _MockChatHandler)
        self.httpd.response_status = status
        self.httpd.response_text = text
        self.httpd.requests = []
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base_url(self):
        host, port = self.httpd.server_address
        return f"http://{host}:{port}/v1"

    @property
    def requests(self):
        return self.httpd.requests

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def mock_chat_server():
    servers = []

    def factory(status=200, text="ok"):
        server = MockChatServer(status=status, text=text)
        servers.append(server)
        return server

    yield factory
    for server in servers:
        server.close()
