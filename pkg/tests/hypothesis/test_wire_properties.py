"""
Property-based tests for the packet codec and stream framing using Hypothesis.

These verify invariants that must hold for ANY valid packet:
- encode/decode is the identity and always yields 20 bytes
- any single-byte corruption of the payload is detected
- framing a stream is independent of how it is chunked
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from headmotion.errors import BadChecksum
from headmotion.wire import (
    INT16_MAX,
    INT16_MIN,
    PACKET_SIZE,
    RawImuPacket,
    StreamFramer,
    decode_packet,
    encode_packet,
    frame_stream,
    physical_to_raw,
    raw_to_physical,
)

# =============================================================================
# Strategies
# =============================================================================

int16 = st.integers(min_value=INT16_MIN, max_value=INT16_MAX)
axes = st.tuples(int16, int16, int16)


@st.composite
def packets(draw):
    return RawImuPacket(
        seq=draw(st.integers(min_value=0, max_value=255)),
        t_ms=draw(st.integers(min_value=0, max_value=2**32 - 1)),
        gyro_raw=draw(axes),
        acc_raw=draw(axes),
    )


# =============================================================================
# Codec
# =============================================================================


class TestCodecProperties:
    @given(packets())
    def test_round_trip(self, pkt):
        data = encode_packet(pkt)
        assert len(data) == PACKET_SIZE
        assert decode_packet(data) == pkt

    @given(
        packets(),
        st.integers(min_value=2, max_value=18),
        st.integers(min_value=1, max_value=255),
    )
    def test_single_byte_corruption_is_detected(self, pkt, index, flip):
        data = bytearray(encode_packet(pkt))
        data[index] ^= flip
        with pytest.raises(BadChecksum):
            decode_packet(bytes(data))

    @given(packets())
    def test_physical_round_trip(self, pkt):
        assert physical_to_raw(raw_to_physical(pkt), seq=pkt.seq) == pkt


# =============================================================================
# Framing
# =============================================================================


class TestFramingProperties:
    @given(
        st.lists(packets(), min_size=1, max_size=20),
        st.lists(st.integers(min_value=1, max_value=45), min_size=1, max_size=10),
    )
    @settings(max_examples=50, deadline=None)
    def test_chunking_is_invisible(self, pkts, sizes):
        data = b"".join(encode_packet(p) for p in pkts)
        chunks = []
        pos = 0
        i = 0
        while pos < len(data):
            size = sizes[i % len(sizes)]
            chunks.append(data[pos : pos + size])
            pos += size
            i += 1
        assert list(frame_stream(chunks)) == pkts

    @given(st.lists(packets(), min_size=1, max_size=10), st.binary(max_size=40))
    @settings(max_examples=50, deadline=None)
    def test_trailing_garbage_never_invents_packets(self, pkts, tail):
        tail = tail.replace(b"\x55", b"")
        framer = StreamFramer()
        data = b"".join(encode_packet(p) for p in pkts)
        assert list(frame_stream(data + tail, framer)) == pkts
        assert framer.stats.packets == len(pkts)
        assert framer.stats.skipped_bytes == len(tail)
