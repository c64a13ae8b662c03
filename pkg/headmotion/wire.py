"""
Binary packet format of the emulated earable.

Every packet is exactly 20 bytes, little-endian:

    Byte  | Size | Field
    ------|------|---------------------------------------------------
    0-1   |  2   | sync marker 0x55 0xAA
    2     |  1   | seq, sequence counter (wraps mod 256)
    3-6   |  4   | t_ms, unsigned milliseconds since session start
    7-12  |  6   | gyro x, y, z  (signed 16-bit raw counts)
    13-18 |  6   | acc x, y, z   (signed 16-bit raw counts)
    19    |  1   | checksum = sum(bytes[2:19]) mod 256

The sync marker makes resynchronization a byte scan; the checksum rejects
corrupted packets. Raw counts are converted to physical units through a
ScaleConfig, never through constants in the decoding logic.
"""

import logging
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Tuple, Union

from .errors import BadChecksum, BadLength, BadSync, InvalidConfig, SampleOutOfRange
from .session import ImuSample, Vec3

logger = logging.getLogger(__name__)

SYNC = b"\x55\xaa"
PACKET_SIZE = 20
INT16_MIN, INT16_MAX = -(2**15), 2**15 - 1

_LAYOUT = struct.Struct("<2sBI6hB")
assert _LAYOUT.size == PACKET_SIZE


@dataclass(frozen=True)
class ScaleConfig:
    """Raw-count scale factors. Defaults mimic a ±4 g / ±500 dps IMU."""

    acc_lsb_per_g: float = 8192.0
    gyro_lsb_per_dps: float = 65.5

    def __post_init__(self):
        for name in ("acc_lsb_per_g", "gyro_lsb_per_dps"):
            value = getattr(self, name)
            if not value > 0:
                raise InvalidConfig(f"ScaleConfig.{name} must be strictly positive, got {value!r}")


@dataclass(frozen=True)
class RawImuPacket:
    seq: int
    t_ms: int
    gyro_raw: Tuple[int, int, int]
    acc_raw: Tuple[int, int, int]

    def __post_init__(self):
        if not 0 <= self.seq <= 0xFF:
            raise ValueError(f"seq must fit in one byte, got {self.seq}")
        if not 0 <= self.t_ms <= 0xFFFFFFFF:
            raise ValueError(f"t_ms must fit in 32 bits, got {self.t_ms}")
        for name in ("gyro_raw", "acc_raw"):
            axes = tuple(int(v) for v in getattr(self, name))
            if len(axes) != 3 or not all(INT16_MIN <= v <= INT16_MAX for v in axes):
                raise ValueError(f"{name} must be 3 signed 16-bit values, got {axes}")
            object.__setattr__(self, name, axes)


def checksum(body: bytes) -> int:
    """Sum of ``body`` mod 256 (body = bytes[2:19] of a packet)."""
    return sum(body) & 0xFF


def encode_packet(pkt: RawImuPacket) -> bytes:
    """Serialize ``pkt`` to its 20-byte wire form."""
    frame = _LAYOUT.pack(SYNC, pkt.seq, pkt.t_ms, *pkt.gyro_raw, *pkt.acc_raw, 0)
    return frame[:-1] + bytes([checksum(frame[2:-1])])


def decode_packet(data: bytes) -> RawImuPacket:
    """Parse one 20-byte packet.

    Raises:
        BadLength: ``data`` is not exactly 20 bytes.
        BadSync: the first two bytes are not 55 AA.
        BadChecksum: the stored checksum disagrees with the payload.
    """
    data = bytes(data)
    if len(data) != PACKET_SIZE:
        raise BadLength(len(data), PACKET_SIZE)
    if data[:2] != SYNC:
        raise BadSync(data[:2])
    computed = checksum(data[2:-1])
    if data[-1] != computed:
        raise BadChecksum(data[-1], computed)
    _, seq, t_ms, gx, gy, gz, ax, ay, az, _ = _LAYOUT.unpack(data)
    return RawImuPacket(seq, t_ms, (gx, gy, gz), (ax, ay, az))


@dataclass
class FrameStats:
    """Counters kept while reframing a byte stream."""

    packets: int = 0
    skipped_bytes: int = 0
    corrupted: int = 0
    sequence_gaps: int = 0
    duplicates: int = 0


class StreamFramer:
    """Incremental reframer for a byte stream of packets.

    Scans for the sync marker; when a candidate fails to decode it advances a
    single byte and rescans, so a corrupted packet costs at most its own bytes.
    Only packets that decode cleanly are returned.
    """

    def __init__(self):
        self._buffer = bytearray()
        self._last_seq = None
        self.stats = FrameStats()

    def feed(self, chunk: bytes) -> List[RawImuPacket]:
        """Append ``chunk`` and return every packet now complete."""
        self._buffer.extend(chunk)
        out = []
        buf = self._buffer
        pos = 0
        while True:
            start = buf.find(SYNC, pos)
            if start < 0:
                # keep a trailing 0x55: it may be the first half of a marker
                keep = 1 if pos < len(buf) and buf[-1] == SYNC[0] else 0
                self.stats.skipped_bytes += len(buf) - pos - keep
                pos = len(buf) - keep
                break
            self.stats.skipped_bytes += start - pos
            pos = start
            if len(buf) - pos < PACKET_SIZE:
                break
            try:
                pkt = decode_packet(buf[pos : pos + PACKET_SIZE])
            except BadChecksum as e:
                self.stats.corrupted += 1
                logger.debug("dropping corrupted packet at stream offset +%d: %s", pos, e)
                self.stats.skipped_bytes += 1
                pos += 1
                continue
            self._track_sequence(pkt.seq)
            self.stats.packets += 1
            out.append(pkt)
            pos += PACKET_SIZE
        del buf[:pos]
        return out

    def _track_sequence(self, seq: int) -> None:
        last = self._last_seq
        self._last_seq = seq
        if last is None:
            return
        if seq == last:
            self.stats.duplicates += 1
            logger.debug("duplicate sequence number %d", seq)
            return
        missing = (seq - last - 1) & 0xFF
        if missing:
            self.stats.sequence_gaps += missing
            logger.debug("sequence gap: %d -> %d (%d missing)", last, seq, missing)

    @property
    def pending(self) -> int:
        """Bytes buffered that do not yet form a complete packet."""
        return len(self._buffer)


def frame_stream(
    data: Union[bytes, Iterable[bytes]], framer: Optional[StreamFramer] = None
) -> Iterator[RawImuPacket]:
    """Yield every cleanly decoding packet of a byte stream, in order.

    ``data`` is either one bytes-like object or an iterable of chunks (e.g.
    successive socket reads). Pass a StreamFramer to read its stats afterwards.
    """
    framer = framer if framer is not None else StreamFramer()
    chunks = [data] if isinstance(data, (bytes, bytearray, memoryview)) else data
    for chunk in chunks:
        yield from framer.feed(bytes(chunk))


def raw_to_physical(pkt: RawImuPacket, scale: ScaleConfig = ScaleConfig()) -> ImuSample:
    """Convert raw counts to g and deg/s; the timestamp is copied."""
    acc = Vec3(*(v / scale.acc_lsb_per_g for v in pkt.acc_raw))
    gyro = Vec3(*(v / scale.gyro_lsb_per_dps for v in pkt.gyro_raw))
    return ImuSample(pkt.t_ms, acc, gyro)


def _to_counts(vec: Vec3, lsb: float, what: str) -> Tuple[int, int, int]:
    counts = tuple(int(round(v * lsb)) for v in vec.as_list())
    if not all(INT16_MIN <= c <= INT16_MAX for c in counts):
        raise SampleOutOfRange(f"{what} {vec.as_list()} exceeds the 16-bit raw range")
    return counts


def physical_to_raw(
    sample: ImuSample, scale: ScaleConfig = ScaleConfig(), seq: int = 0
) -> RawImuPacket:
    """Quantize a physical sample to raw counts (round to nearest).

    For samples that came out of raw_to_physical this is the exact inverse.

    Raises:
        SampleOutOfRange: a component does not fit a signed 16-bit count.
    """
    return RawImuPacket(
        seq & 0xFF,
        sample.t_ms,
        _to_counts(sample.gyro, scale.gyro_lsb_per_dps, "gyro"),
        _to_counts(sample.acc, scale.acc_lsb_per_g, "acc"),
    )
