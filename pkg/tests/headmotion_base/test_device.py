"""Tests for the TCP device emulator and capture (headmotion/device.py)."""

import socket
import threading

import pytest

from headmotion.device import PACKETS_PER_WRITE, DeviceEmulator, capture
from headmotion.errors import IoFailure, SampleOutOfRange
from headmotion.session import ImuSample, Session, Vec3
from headmotion.wire import PACKET_SIZE, ScaleConfig


def counts_session(n, participant_id="P001"):
    """Samples whose values are exact raw counts under the default scale."""
    scale = ScaleConfig()
    return Session(
        participant_id,
        tuple(
            ImuSample(
                i * 1000,
                Vec3(i / scale.acc_lsb_per_g, -3 / scale.acc_lsb_per_g, 8192 / scale.acc_lsb_per_g),
                Vec3(i / scale.gyro_lsb_per_dps, 0.0, -(i % 7) / scale.gyro_lsb_per_dps),
            )
            for i in range(n)
        ),
    )


def serve_in_background(device, timeout=10.0):
    thread = threading.Thread(target=device.serve_one, kwargs={"timeout": timeout}, daemon=True)
    thread.start()
    return thread


class TestLoopback:
    def test_firehose_round_trip(self):
        session = counts_session(40)
        with DeviceEmulator(session) as device:
            host, port = device.bind("127.0.0.1", 0)
            thread = serve_in_background(device)
            captured, stats = capture(host, port, participant_id="P001", timeout=10.0)
            thread.join(timeout=10.0)
        assert captured == session
        assert stats.packets == 40
        assert stats.corrupted == 0
        assert stats.skipped_bytes == 0
        assert stats.sequence_gaps == 0

    def test_sequence_counter_wraps(self):
        session = counts_session(300)
        with DeviceEmulator(session) as device:
            host, port = device.bind("127.0.0.1", 0)
            thread = serve_in_background(device)
            captured, stats = capture(host, port, participant_id="P001", timeout=10.0)
            thread.join(timeout=10.0)
        assert len(captured) == 300
        assert stats.sequence_gaps == 0

    def test_empty_session(self):
        with DeviceEmulator(Session("P000", ())) as device:
            host, port = device.bind("127.0.0.1", 0)
            thread = serve_in_background(device)
            captured, stats = capture(host, port, participant_id="P000", timeout=10.0)
            thread.join(timeout=10.0)
        assert captured == Session("P000", ())
        assert stats.packets == 0


class TestEmulator:
    def test_out_of_range_sample_fails_before_serving(self):
        loud = Session("P001", (ImuSample(0, Vec3(9.0, 0.0, 0.0), Vec3(0.0, 0.0, 0.0)),))
        with pytest.raises(SampleOutOfRange):
            DeviceEmulator(loud)

    def test_negative_period(self):
        with pytest.raises(ValueError):
            DeviceEmulator(counts_session(1), period_ms=-1)

    def test_address_requires_bind(self):
        device = DeviceEmulator(counts_session(1))
        with pytest.raises(RuntimeError):
            device.address
        host, port = device.bind("127.0.0.1", 0)
        assert device.address == (host, port)
        device.close()

    def test_port_in_use(self):
        blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        try:
            with DeviceEmulator(counts_session(1)) as device:
                with pytest.raises(IoFailure):
                    device.bind("127.0.0.1", blocker.getsockname()[1])
        finally:
            blocker.close()


class TestCapture:
    def test_connection_refused(self):
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
        sock.close()
        with pytest.raises(IoFailure):
            capture("127.0.0.1", port, timeout=2.0)


class FakeClock:
    """Stands in for the time module: sleeping advances the clock instantly."""

    def __init__(self):
        self.now = 0.0
        self.sleeps = []

    def monotonic(self):
        return self.now

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.now += seconds


class FlakyConnection:
    """Accepts ``writes`` sendall calls, then behaves like a vanished client."""

    def __init__(self, writes):
        self.writes = writes
        self.sent = []

    def sendall(self, data):
        if len(self.sent) == self.writes:
            raise BrokenPipeError(32, "Broken pipe")
        self.sent.append(bytes(data))


class TestPacing:
    def test_default_period_is_one_packet_per_second(self, monkeypatch):
        clock = FakeClock()
        monkeypatch.setattr("headmotion.device.time", clock)
        session = counts_session(10)
        with DeviceEmulator(session, realtime=True) as device:
            assert device.period_ms == 1000
            host, port = device.bind("127.0.0.1", 0)
            thread = serve_in_background(device)
            captured, stats = capture(host, port, participant_id="P001", timeout=10.0)
            thread.join(timeout=10.0)
        assert clock.sleeps == pytest.approx([1.0] * 9)
        assert clock.now == pytest.approx(9.0)
        assert captured == session
        assert stats.packets == 10

    def test_custom_period(self, monkeypatch):
        clock = FakeClock()
        monkeypatch.setattr("headmotion.device.time", clock)
        conn = FlakyConnection(writes=100)
        device = DeviceEmulator(counts_session(4), period_ms=250, realtime=True)
        assert device._stream(conn) == 4
        assert clock.sleeps == pytest.approx([0.25] * 3)
        assert [len(data) for data in conn.sent] == [PACKET_SIZE] * 4


class TestDisconnect:
    def test_realtime_reports_packets_sent_before_the_disconnect(self):
        device = DeviceEmulator(counts_session(10), period_ms=0, realtime=True)
        assert device._stream(FlakyConnection(writes=4)) == 4

    def test_firehose_reports_whole_writes_sent(self):
        device = DeviceEmulator(counts_session(500))
        conn = FlakyConnection(writes=2)
        assert device._stream(conn) == 2 * PACKETS_PER_WRITE
        assert sum(len(data) for data in conn.sent) == 2 * PACKETS_PER_WRITE * PACKET_SIZE

    def test_complete_firehose(self):
        device = DeviceEmulator(counts_session(500))
        assert device._stream(FlakyConnection(writes=100)) == 500
