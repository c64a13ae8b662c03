"""
Exception hierarchy for headmotion.

Every failure the library raises on purpose derives from HeadMotionError, so
the CLI can tell a data/validation problem (exit code 2) from a bug. Each
class also derives from the builtin matching its nature (ValueError for bad
input, OSError for I/O), so callers that already catch those keep working.
"""


class HeadMotionError(Exception):
    """Base class of every headmotion error."""


class ConfigError(HeadMotionError, ValueError):
    """An HEADMOTION_* variable or a configuration object holds an invalid value."""


# ---------------------------------------------------------------------------
# wire
# ---------------------------------------------------------------------------
class WireError(HeadMotionError, ValueError):
    """A byte string is not a valid 20-byte IMU packet."""


class BadLength(WireError):
    def __init__(self, length: int, expected: int):
        super().__init__(f"packet must be {expected} bytes, got {length}")
        self.length = length


class BadSync(WireError):
    def __init__(self, found: bytes):
        super().__init__(f"bad sync marker {found.hex(' ')!r} (expected '55 aa')")
        self.found = found


class BadChecksum(WireError):
    def __init__(self, stored: int, computed: int):
        super().__init__(f"checksum mismatch: stored 0x{stored:02x}, computed 0x{computed:02x}")
        self.stored = stored
        self.computed = computed


class SampleOutOfRange(WireError):
    """A physical reading does not fit the signed 16-bit raw range."""


# ---------------------------------------------------------------------------
# session
# ---------------------------------------------------------------------------
class SessionError(HeadMotionError, ValueError):
    """Invalid session or timeline content."""


class UnknownEmotion(SessionError):
    def __init__(self, name: str, row=None):
        where = f" (row {row})" if row is not None else ""
        super().__init__(f"unknown emotion {name!r}{where}")
        self.name = name
        self.row = row


class OverlappingSegments(SessionError):
    def __init__(self, previous, current):
        super().__init__(
            f"segment {current.emotion.label} [{current.start_ms}, {current.end_ms}) overlaps "
            f"{previous.emotion.label} [{previous.start_ms}, {previous.end_ms})"
        )
        self.previous = previous
        self.current = current


class InvertedInterval(SessionError):
    def __init__(self, start_ms: int, end_ms: int, row=None):
        where = f" (row {row})" if row is not None else ""
        super().__init__(f"segment start {start_ms} is not before end {end_ms}{where}")
        self.start_ms = start_ms
        self.end_ms = end_ms


class MalformedRow(SessionError):
    def __init__(self, row, reason: str):
        super().__init__(f"malformed timeline row {row}: {reason}")
        self.row = row


class UnsortedSamples(SessionError):
    def __init__(self, index: int):
        super().__init__(f"samples are not sorted by t_ms (first decrease at index {index})")
        self.index = index


class UnsortedSegments(SessionError):
    def __init__(self, index: int):
        super().__init__(f"timeline segments are not sorted by start_ms (segment {index})")
        self.index = index


class MalformedLine(SessionError):
    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no


class IoFailure(HeadMotionError, OSError):
    """A session or report file could not be read or written."""


# ---------------------------------------------------------------------------
# features
# ---------------------------------------------------------------------------
class FeatureError(HeadMotionError, ValueError):
    pass


class EmptySeries(FeatureError):
    def __init__(self):
        super().__init__("cannot compute moments of an empty series")


class InsufficientSamples(FeatureError):
    def __init__(self, emotion, count: int, needed: int):
        super().__init__(
            f"emotion {emotion.label!r} has {count} sample(s), at least {needed} are needed"
        )
        self.emotion = emotion
        self.count = count


# ---------------------------------------------------------------------------
# learn
# ---------------------------------------------------------------------------
class LearnError(HeadMotionError, ValueError):
    pass


class DegenerateDataset(LearnError):
    pass


class InvalidHyperparameters(LearnError):
    pass


class TooFewRows(LearnError):
    pass


class LabelDomainMismatch(LearnError):
    pass


class EmptyMatrix(LearnError):
    def __init__(self):
        super().__init__("confusion matrix has no counts")


# ---------------------------------------------------------------------------
# matrix
# ---------------------------------------------------------------------------
class MatrixError(HeadMotionError, ValueError):
    pass


class MissingEmotion(MatrixError):
    def __init__(self, participant: str, emotions):
        names = ", ".join(e.label for e in emotions)
        super().__init__(f"participant {participant!r} has no features for: {names}")
        self.participant = participant
        self.emotions = tuple(emotions)


class DegenerateTrait(MatrixError):
    def __init__(self, trait, value):
        super().__init__(f"every participant answers {trait.value}={value}; nothing to learn")
        self.trait = trait


class MissingEmotionFeatures(MatrixError):
    def __init__(self, trait, emotion):
        super().__init__(
            f"trait {trait.value} is predicted from {emotion.label} features, which are missing"
        )
        self.trait = trait
        self.emotion = emotion


class MalformedTable(MatrixError):
    """A features or traits CSV is missing columns or holds invalid values."""


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------
class InvalidConfig(HeadMotionError, ValueError):
    pass
