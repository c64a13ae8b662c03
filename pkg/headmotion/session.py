"""
Sessions of physical-unit IMU samples, experiment timelines, and the
timestamp merge that labels each sample with the emotion being induced.

File formats:

    session (JSON lines)    {"participant_id":"P001"}
                            {"t_ms":0,"acc":[0.01,-0.02,0.99],"gyro":[1.5,0.0,-0.5]}
                            ...
    timeline (CSV)          emotion,start_ms,end_ms
                            happy,0,120000
                            ...

Segments are half-open intervals [start_ms, end_ms). Samples that fall in no
segment (transitions between videos) are dropped and counted.
"""

import csv
import io
import json
import logging
import math
import numbers
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from .errors import (
    InvertedInterval,
    IoFailure,
    MalformedLine,
    MalformedRow,
    OverlappingSegments,
    UnknownEmotion,
    UnsortedSamples,
    UnsortedSegments,
)

logger = logging.getLogger(__name__)

U32_MAX = 2**32 - 1
TIMELINE_HEADER = ("emotion", "start_ms", "end_ms")


class EmotionState(Enum):
    """The five induced states. Declaration order is the tie-break order."""

    HAPPY = "happy"
    SAD = "sad"
    NEUTRAL = "neutral"
    SURPRISE = "surprise"
    DISGUST = "disgust"

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def parse(cls, name: str, row=None) -> "EmotionState":
        """Case-insensitive lookup by name."""
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise UnknownEmotion(str(name), row) from None


EMOTIONS: Tuple[EmotionState, ...] = tuple(EmotionState)


@dataclass(frozen=True)
class Vec3:
    """Three-axis reading: g for acceleration, deg/s for rotation rate."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for axis in ("x", "y", "z"):
            value = float(getattr(self, axis))
            if not math.isfinite(value):
                raise ValueError(f"Vec3.{axis} must be finite, got {value!r}")
            object.__setattr__(self, axis, value)

    def as_list(self) -> List[float]:
        return [self.x, self.y, self.z]


@dataclass(frozen=True)
class ImuSample:
    t_ms: int
    acc: Vec3
    gyro: Vec3

    def __post_init__(self):
        t_ms = self.t_ms
        integral = isinstance(t_ms, numbers.Integral) and not isinstance(t_ms, bool)
        if not integral or not 0 <= t_ms <= U32_MAX:
            raise ValueError(f"t_ms must be an unsigned 32-bit integer, got {t_ms!r}")
        object.__setattr__(self, "t_ms", int(t_ms))


@dataclass(frozen=True)
class Segment:
    emotion: EmotionState
    start_ms: int
    end_ms: int

    def contains(self, t_ms: int) -> bool:
        return self.start_ms <= t_ms < self.end_ms

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


@dataclass(frozen=True)
class Timeline:
    """Ordered, non-overlapping emotion segments."""

    segments: Tuple[Segment, ...]

    def __post_init__(self):
        segments = tuple(self.segments)
        object.__setattr__(self, "segments", segments)
        for seg in segments:
            if seg.start_ms >= seg.end_ms:
                raise InvertedInterval(seg.start_ms, seg.end_ms)
        for index, (previous, current) in enumerate(zip(segments, segments[1:]), start=1):
            if current.start_ms < previous.start_ms:
                raise UnsortedSegments(index)
            if current.start_ms < previous.end_ms:
                raise OverlappingSegments(previous, current)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)


@dataclass(frozen=True)
class Session:
    """One participant's unlabeled recording, as persisted on disk."""

    participant_id: str
    samples: Tuple[ImuSample, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class LabeledSession:
    participant_id: str
    labeled: Tuple[Tuple[ImuSample, EmotionState], ...] = ()
    dropped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "labeled", tuple(self.labeled))

    def __len__(self) -> int:
        return len(self.labeled)

    def emotions(self) -> List[EmotionState]:
        """Emotions present, in tie-break order."""
        present = {emotion for _, emotion in self.labeled}
        return [e for e in EMOTIONS if e in present]

    def samples_for(self, emotion: EmotionState) -> List[ImuSample]:
        return [sample for sample, e in self.labeled if e is emotion]


def sample_arrays(samples: Sequence[ImuSample]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(t_ms, acc, gyro) as numpy arrays of shapes (n,), (n, 3), (n, 3)."""
    n = len(samples)
    t = np.fromiter((s.t_ms for s in samples), dtype=np.int64, count=n)
    acc = np.array([(s.acc.x, s.acc.y, s.acc.z) for s in samples], dtype=np.float64)
    gyro = np.array([(s.gyro.x, s.gyro.y, s.gyro.z) for s in samples], dtype=np.float64)
    return t, acc.reshape(n, 3), gyro.reshape(n, 3)


# ---------------------------------------------------------------------------
# Timelines
# ---------------------------------------------------------------------------
def _parse_ms(value: str, row: int, column: str) -> int:
    text = value.strip()
    if not (text.isascii() and text.isdigit()):
        raise MalformedRow(row, f"{column} must be a non-negative integer, got {value!r}")
    ms = int(text)
    if ms > U32_MAX:
        raise MalformedRow(row, f"{column} {ms} exceeds the 32-bit range")
    return ms


def parse_timeline(text: str) -> Timeline:
    """Parse a timeline CSV (header ``emotion,start_ms,end_ms``).

    Emotion names are case-insensitive. A file without the header line is
    read as bare data rows. Row numbers in errors are 1-based file lines.

    Raises:
        UnknownEmotion, OverlappingSegments, InvertedInterval, MalformedRow
    """
    rows = list(csv.reader(io.StringIO(text)))
    segments = []
    for line_no, fields in enumerate(rows, start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if line_no == 1 and tuple(f.strip().lower() for f in fields) == TIMELINE_HEADER:
            continue
        if len(fields) != 3:
            raise MalformedRow(line_no, f"expected 3 fields, got {len(fields)}")
        emotion = EmotionState.parse(fields[0], row=line_no)
        start = _parse_ms(fields[1], line_no, "start_ms")
        end = _parse_ms(fields[2], line_no, "end_ms")
        if start >= end:
            raise InvertedInterval(start, end, row=line_no)
        segments.append(Segment(emotion, start, end))
    segments.sort(key=lambda s: (s.start_ms, s.end_ms))
    return Timeline(tuple(segments))


def read_timeline(path: Union[str, Path]) -> Timeline:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot read timeline {path}: {e.strerror or e}") from e
    return parse_timeline(text)


def format_timeline(timeline: Timeline) -> str:
    """Render a timeline in the CSV format parse_timeline reads."""
    out = [",".join(TIMELINE_HEADER)]
    for seg in timeline:
        out.append(f"{seg.emotion.value},{seg.start_ms},{seg.end_ms}")
    return "\n".join(out) + "\n"


def write_timeline(timeline: Timeline, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        path.write_text(format_timeline(timeline), encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write timeline {path}: {e.strerror or e}") from e


# ---------------------------------------------------------------------------
# Labeling
# ---------------------------------------------------------------------------
def _check_sorted(samples: Sequence[ImuSample]) -> None:
    for i in range(1, len(samples)):
        if samples[i].t_ms < samples[i - 1].t_ms:
            raise UnsortedSamples(i)


def label_samples(
    samples: Sequence[ImuSample], tl: Timeline, participant_id: str = ""
) -> LabeledSession:
    """Tag each sample with the emotion of the segment containing its t_ms.

    Samples outside every segment are dropped; ``LabeledSession.dropped``
    holds how many. Order is preserved.

    Raises:
        UnsortedSamples: if t_ms decreases anywhere in ``samples``.
    """
    _check_sorted(samples)
    segments = tl.segments
    labeled = []
    dropped = 0
    j = 0
    for sample in samples:
        while j < len(segments) and segments[j].end_ms <= sample.t_ms:
            j += 1
        if j < len(segments) and segments[j].contains(sample.t_ms):
            labeled.append((sample, segments[j].emotion))
        else:
            dropped += 1
    if dropped:
        logger.warning(
            "%s: dropped %d of %d samples outside every timeline segment",
            participant_id or "session",
            dropped,
            len(samples),
        )
    return LabeledSession(participant_id, tuple(labeled), dropped)


def segment_samples(
    samples: Sequence[ImuSample], tl: Timeline
) -> List[Tuple[Segment, List[ImuSample]]]:
    """Group samples per timeline segment (segments without samples included)."""
    _check_sorted(samples)
    groups: List[Tuple[Segment, List[ImuSample]]] = [(seg, []) for seg in tl]
    j = 0
    for sample in samples:
        while j < len(groups) and groups[j][0].end_ms <= sample.t_ms:
            j += 1
        if j < len(groups) and groups[j][0].contains(sample.t_ms):
            groups[j][1].append(sample)
    return groups


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------
def _sample_line(sample: ImuSample) -> str:
    # json renders floats with repr(): the shortest string that round-trips.
    return json.dumps(
        {"t_ms": sample.t_ms, "acc": sample.acc.as_list(), "gyro": sample.gyro.as_list()},
        separators=(",", ":"),
    )


def format_session(session: Session) -> str:
    lines = [json.dumps({"participant_id": session.participant_id}, separators=(",", ":"))]
    lines.extend(_sample_line(s) for s in session.samples)
    return "\n".join(lines) + "\n"


def persist_session(session: Session, path: Union[str, Path]) -> None:
    """Write ``session`` as JSON lines (header object first)."""
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(format_session(session))
    except OSError as e:
        raise IoFailure(f"cannot write session {path}: {e.strerror or e}") from e


def _vec(value, path, line_no: int, key: str) -> Vec3:
    if not isinstance(value, list) or len(value) != 3:
        raise MalformedLine(path, line_no, f"{key!r} must be a list of 3 numbers")
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise MalformedLine(path, line_no, f"{key!r} holds a non-numeric value {v!r}")
    try:
        return Vec3(*value)
    except ValueError as e:
        raise MalformedLine(path, line_no, str(e)) from None


def parse_session(lines: Iterable[str], path="<session>") -> Session:
    """Parse session JSON lines. ``path`` only labels error messages."""
    participant_id = None
    samples = []
    line_no = 0
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedLine(path, line_no, f"invalid JSON ({e.msg})") from None
        if not isinstance(obj, dict):
            raise MalformedLine(path, line_no, "expected a JSON object")
        if participant_id is None:
            pid = obj.get("participant_id")
            if set(obj) != {"participant_id"} or not isinstance(pid, str):
                raise MalformedLine(path, line_no, 'first line must be {"participant_id": "..."}')
            participant_id = pid
            continue
        if set(obj) != {"t_ms", "acc", "gyro"}:
            raise MalformedLine(path, line_no, f"unexpected keys {sorted(obj)}")
        t_ms = obj["t_ms"]
        if isinstance(t_ms, bool) or not isinstance(t_ms, int) or not 0 <= t_ms <= U32_MAX:
            raise MalformedLine(path, line_no, "t_ms must be an unsigned 32-bit integer")
        acc = _vec(obj["acc"], path, line_no, "acc")
        gyro = _vec(obj["gyro"], path, line_no, "gyro")
        samples.append(ImuSample(t_ms, acc, gyro))
    if participant_id is None:
        raise MalformedLine(path, max(line_no, 1), "missing participant header line")
    return Session(participant_id, tuple(samples))


def _decoded_lines(f, path) -> Iterator[str]:
    for line_no, raw in enumerate(f, start=1):
        try:
            yield raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedLine(path, line_no, f"not valid UTF-8 ({e.reason})") from None


def read_session(path: Union[str, Path]) -> Session:
    """Read a session written by persist_session.

    Raises:
        IoFailure: the file cannot be opened.
        MalformedLine: a line is not valid UTF-8 or not a valid header/sample object.
    """
    path = Path(path)
    try:
        with open(path, "rb") as f:
            return parse_session(_decoded_lines(f, path), path=path)
    except OSError as e:
        raise IoFailure(f"cannot read session {path}: {e.strerror or e}") from e
