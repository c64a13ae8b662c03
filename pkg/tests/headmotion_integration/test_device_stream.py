"""
Device emulation over real sockets: paced streaming, and the serve-device /
capture commands talking to each other as separate processes.
"""

import socket
import subprocess
import sys
import threading
import time

import pytest

from headmotion.device import DeviceEmulator
from headmotion.session import Session, read_session
from headmotion.synth import generate_cohort, strong_preset, write_cohort
from headmotion.wire import StreamFramer, raw_to_physical

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def participant(tmp_path_factory):
    out = tmp_path_factory.mktemp("device")
    cohort = generate_cohort(strong_preset(seed=21, n_participants=4))
    write_cohort(cohort, out)
    return cohort.participants[0], out / f"{cohort.participants[0].record.id}.jsonl"


def free_port():
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class TestRealtime:
    def test_one_hertz_session_arrives_one_packet_per_second(self, participant):
        p, _ = participant
        session = Session(p.session.participant_id, p.session.samples[:10])
        framer = StreamFramer()
        packets, arrivals = [], []
        with DeviceEmulator(session, realtime=True) as device:
            host, port = device.bind("127.0.0.1", 0)
            thread = threading.Thread(target=device.serve_one, kwargs={"timeout": 20.0})
            thread.start()
            with socket.create_connection((host, port), timeout=20.0) as sock:
                while True:
                    chunk = sock.recv(64)
                    if not chunk:
                        break
                    got = framer.feed(chunk)
                    arrivals.extend([time.monotonic()] * len(got))
                    packets.extend(got)
            thread.join(timeout=20.0)
        captured = Session(session.participant_id, tuple(raw_to_physical(pkt) for pkt in packets))
        assert captured == session
        assert framer.stats.corrupted == 0
        gaps = [later - earlier for earlier, later in zip(arrivals, arrivals[1:])]
        assert len(gaps) == 9
        assert all(0.5 <= gap <= 2.0 for gap in gaps), gaps
        # the schedule is absolute, so jitter does not accumulate
        assert 8.9 <= arrivals[-1] - arrivals[0] <= 10.0


class TestCommands:
    def test_serve_and_capture(self, participant, tmp_path):
        p, session_path = participant
        port = free_port()
        server = subprocess.Popen(
            [
                sys.executable,
                "-m",
                "headmotion.cli",
                "serve-device",
                "--session",
                str(session_path),
                "--port",
                str(port),
                "--once",
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        out = tmp_path / "captured.jsonl"
        try:
            deadline = time.monotonic() + 30
            while True:
                result = subprocess.run(
                    [
                        sys.executable,
                        "-m",
                        "headmotion.cli",
                        "capture",
                        "--port",
                        str(port),
                        "--out",
                        str(out),
                        "--timeout",
                        "10",
                    ],
                    capture_output=True,
                    text=True,
                    timeout=60,
                )
                # the server may still be importing when the first attempt connects
                if result.returncode == 0 or time.monotonic() > deadline:
                    break
                time.sleep(0.2)
            assert result.returncode == 0, result.stderr
            assert server.wait(timeout=30) == 0
        finally:
            if server.poll() is None:
                server.kill()
                server.wait()

        captured = read_session(out)
        # --participant-id defaults to the output file stem
        assert captured.participant_id == "captured"
        assert captured.samples == p.session.samples
        assert f"Captured {len(p.session)} packets (0 corrupted" in result.stderr
