"""
TCP emulation of the earable.

DeviceEmulator replays a persisted session as a stream of 20-byte wire
packets to one client at a time; capture() connects, reframes the stream
until the device closes it, and rebuilds the session.

    with DeviceEmulator(session, realtime=False) as device:
        host, port = device.bind("127.0.0.1", 0)
        threading.Thread(target=device.serve_one).start()
        captured, stats = capture(host, port, participant_id="P001")
"""

import logging
import socket
import time
from typing import List, Optional, Tuple

from .errors import IoFailure
from .session import ImuSample, Session
from .wire import (
    PACKET_SIZE,
    FrameStats,
    ScaleConfig,
    StreamFramer,
    encode_packet,
    physical_to_raw,
    raw_to_physical,
)

logger = logging.getLogger(__name__)

DEFAULT_PERIOD_MS = 1000
CHUNK_SIZE = 4096
PACKETS_PER_WRITE = CHUNK_SIZE // PACKET_SIZE


class DeviceEmulator:
    """Serves one session over TCP, one client connection at a time.

    In firehose mode (default) all packets are written at once; with
    ``realtime=True`` one packet is written every ``period_ms``.
    """

    def __init__(
        self,
        session: Session,
        scale: ScaleConfig = ScaleConfig(),
        period_ms: int = DEFAULT_PERIOD_MS,
        realtime: bool = False,
    ):
        if period_ms < 0:
            raise ValueError(f"period_ms must be >= 0, got {period_ms}")
        self.session = session
        self.period_ms = period_ms
        self.realtime = realtime
        # SampleOutOfRange surfaces here, before any client connects
        self._packets = [
            encode_packet(physical_to_raw(sample, scale, seq=i))
            for i, sample in enumerate(session.samples)
        ]
        self._sock: Optional[socket.socket] = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    def bind(self, host: str = "127.0.0.1", port: int = 0) -> Tuple[str, int]:
        """Listen on (host, port); port 0 picks a free port. Returns the bound address."""
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
            sock.listen(1)
        except OSError as e:
            sock.close()
            raise IoFailure(f"cannot listen on {host}:{port}: {e.strerror or e}") from e
        self._sock = sock
        address = sock.getsockname()[:2]
        logger.info("device %s listening on %s:%d", self.session.participant_id, *address)
        return address

    @property
    def address(self) -> Tuple[str, int]:
        if self._sock is None:
            raise RuntimeError("DeviceEmulator is not bound")
        return self._sock.getsockname()[:2]

    def serve_one(self, timeout: Optional[float] = None) -> int:
        """Accept one client and stream the whole session; returns packets sent."""
        if self._sock is None:
            raise RuntimeError("call bind() before serve_one()")
        self._sock.settimeout(timeout)
        conn, peer = self._sock.accept()
        logger.info("client %s:%d connected", *peer[:2])
        with conn:
            sent = self._stream(conn)
        logger.info("client %s:%d done, %d packet(s) sent", peer[0], peer[1], sent)
        return sent

    def serve_forever(self, once: bool = False) -> None:
        while True:
            self.serve_one()
            if once:
                return

    def _stream(self, conn: socket.socket) -> int:
        sent = 0
        try:
            if not self.realtime:
                for i in range(0, len(self._packets), PACKETS_PER_WRITE):
                    batch = self._packets[i : i + PACKETS_PER_WRITE]
                    conn.sendall(b"".join(batch))
                    sent += len(batch)
                return sent
            start = time.monotonic()
            for i, packet in enumerate(self._packets):
                delay = start + i * self.period_ms / 1000.0 - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                conn.sendall(packet)
                sent += 1
        except (BrokenPipeError, ConnectionResetError) as e:
            logger.warning("client disconnected mid-stream after %d packet(s): %s", sent, e)
        return sent

    def close(self) -> None:
        if self._sock is not None:
            self._sock.close()
            self._sock = None


def capture(
    host: str,
    port: int,
    participant_id: str = "",
    scale: ScaleConfig = ScaleConfig(),
    timeout: Optional[float] = None,
) -> Tuple[Session, FrameStats]:
    """Read packets from a device until it closes the connection.

    Raises:
        IoFailure: the connection cannot be made or times out.
    """
    framer = StreamFramer()
    samples: List[ImuSample] = []
    try:
        with socket.create_connection((host, port), timeout=timeout) as sock:
            while True:
                chunk = sock.recv(CHUNK_SIZE)
                if not chunk:
                    break
                samples.extend(raw_to_physical(pkt, scale) for pkt in framer.feed(chunk))
    except OSError as e:
        raise IoFailure(f"capture from {host}:{port} failed: {e.strerror or e}") from e
    stats = framer.stats
    if framer.pending:
        logger.info("%d trailing byte(s) did not form a packet", framer.pending)
    logger.info(
        "captured %d packet(s): %d corrupted, %d byte(s) skipped, %d sequence gap(s)",
        stats.packets,
        stats.corrupted,
        stats.skipped_bytes,
        stats.sequence_gaps,
    )
    return Session(participant_id, tuple(samples)), stats
