"""
Magnitude features of head movement.

Each 6-axis sample is reduced to two magnitudes, the Euclidean norm of the
acceleration (translational term) and of the rotation rate (rotational
term). A segment is then summarized by the mean and standard deviation of
each magnitude series: four numbers per emotion.
"""

import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import EmptySeries, InsufficientSamples, IoFailure, MalformedTable
from .session import EMOTIONS, EmotionState, ImuSample, LabeledSession, Vec3, sample_arrays

logger = logging.getLogger(__name__)

MIN_SAMPLES = 2
FEATURE_NAMES = ("acc_mag_mean", "acc_mag_std", "gyro_mag_mean", "gyro_mag_std")
FEATURES_CSV_COLUMNS = ("participant_id", "emotion") + FEATURE_NAMES
TRACE_CSV_COLUMNS = ("participant_id", "t_s", "emotion", "acc_mag", "gyro_mag")


@dataclass(frozen=True)
class FeatureVector:
    acc_mag_mean: float
    acc_mag_std: float
    gyro_mag_mean: float
    gyro_mag_std: float

    def __post_init__(self):
        for name in FEATURE_NAMES:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            if name.endswith("_std") and value < 0:
                raise ValueError(f"{name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, value)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "FeatureVector":
        return cls(*(float(v) for v in values))


def magnitude(v: Vec3) -> float:
    """Euclidean norm of a 3-axis reading."""
    return math.hypot(v.x, v.y, v.z)


def magnitudes(axes: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean norm of an (n, 3) array."""
    return np.linalg.norm(np.asarray(axes, dtype=np.float64).reshape(-1, 3), axis=1)


def moments(series: Sequence[float], ddof: int = 0) -> Tuple[float, float]:
    """(mean, std) of ``series``; ddof=0 is the population std, ddof=1 the sample std.

    Raises:
        EmptySeries: ``series`` has no elements.
    """
    arr = np.asarray(series, dtype=np.float64)
    if arr.size == 0:
        raise EmptySeries()
    mean = float(arr.mean())
    if arr.size <= ddof:
        # a single value has no spread under either convention
        return mean, 0.0
    return mean, float(arr.std(ddof=ddof))


def segment_features(samples: Sequence[ImuSample], ddof: int = 0) -> FeatureVector:
    """FeatureVector of one group of samples (no minimum count enforced)."""
    _, acc, gyro = sample_arrays(samples)
    acc_mean, acc_std = moments(magnitudes(acc), ddof)
    gyro_mean, gyro_std = moments(magnitudes(gyro), ddof)
    return FeatureVector(acc_mean, acc_std, gyro_mean, gyro_std)


def featurize(session: LabeledSession, ddof: int = 0) -> Dict[EmotionState, FeatureVector]:
    """Map each emotion present in ``session`` to its FeatureVector.

    Raises:
        InsufficientSamples: an emotion present has fewer than 2 samples.
    """
    groups: Dict[EmotionState, List[ImuSample]] = {}
    for sample, emotion in session.labeled:
        groups.setdefault(emotion, []).append(sample)
    out = {}
    for emotion in EMOTIONS:
        samples = groups.get(emotion)
        if samples is None:
            continue
        if len(samples) < MIN_SAMPLES:
            raise InsufficientSamples(emotion, len(samples), MIN_SAMPLES)
        out[emotion] = segment_features(samples, ddof)
        logger.debug(
            "%s %s: %d samples -> %s",
            session.participant_id,
            emotion.label,
            len(samples),
            out[emotion],
        )
    return out


def magnitude_trace(session: LabeledSession) -> pd.DataFrame:
    """Per-second magnitudes of a labeled session (the data behind trace plots).

    Samples are bucketed by whole second (t_ms // 1000); a bucket holding
    several samples reports their mean magnitude.
    """
    columns = list(TRACE_CSV_COLUMNS)
    if not session.labeled:
        return pd.DataFrame(columns=columns)
    samples = [s for s, _ in session.labeled]
    t, acc, gyro = sample_arrays(samples)
    frame = pd.DataFrame(
        {
            "t_s": t // 1000,
            "emotion": [e.label for _, e in session.labeled],
            "acc_mag": magnitudes(acc),
            "gyro_mag": magnitudes(gyro),
        }
    )
    trace = (
        frame.groupby(["t_s", "emotion"], sort=False, as_index=False)
        .agg(acc_mag=("acc_mag", "mean"), gyro_mag=("gyro_mag", "mean"))
        .sort_values("t_s", kind="stable")
    )
    trace.insert(0, "participant_id", session.participant_id)
    return trace[columns].reset_index(drop=True)


def write_trace_csv(trace: pd.DataFrame, path: Union[str, Path, None]) -> str:
    """Write a magnitude trace to ``path`` (or only return it when path is None)."""
    text = trace.to_csv(index=False, lineterminator="\n")
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as e:
            raise IoFailure(f"cannot write trace {path}: {e.strerror or e}") from e
    return text


# ---------------------------------------------------------------------------
# Features CSV
# ---------------------------------------------------------------------------
def features_frame(rows: Mapping[str, Mapping[EmotionState, FeatureVector]]) -> pd.DataFrame:
    """One row per (participant, emotion), participants in the given order."""
    records = []
    for participant_id, by_emotion in rows.items():
        for emotion in EMOTIONS:
            if emotion in by_emotion:
                record = {"participant_id": participant_id, "emotion": emotion.value}
                record.update(asdict(by_emotion[emotion]))
                records.append(record)
    return pd.DataFrame.from_records(records, columns=list(FEATURES_CSV_COLUMNS))


def write_features_csv(
    rows: Mapping[str, Mapping[EmotionState, FeatureVector]], path: Union[str, Path, None]
) -> str:
    """Write the features CSV to ``path`` (or only return it when path is None)."""
    text = features_frame(rows).to_csv(index=False, lineterminator="\n")
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as e:
            raise IoFailure(f"cannot write features {path}: {e.strerror or e}") from e
    return text


def read_features_csv(path: Union[str, Path]) -> Dict[str, Dict[EmotionState, FeatureVector]]:
    """Inverse of write_features_csv.

    Raises:
        MalformedTable: missing columns, unknown emotions or non-numeric values.
    """
    try:
        frame = pd.read_csv(path, dtype={"participant_id": str, "emotion": str})
    except OSError as e:
        raise IoFailure(f"cannot read features {path}: {e.strerror or e}") from e
    missing = [c for c in FEATURES_CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedTable(f"{path}: missing column(s) {', '.join(missing)}")
    out: Dict[str, Dict[EmotionState, FeatureVector]] = {}
    for index, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            emotion = EmotionState.parse(row.emotion)
            vector = FeatureVector(*(float(getattr(row, name)) for name in FEATURE_NAMES))
        except ValueError as e:
            raise MalformedTable(f"{path}: line {index}: {e}") from None
        by_emotion = out.setdefault(str(row.participant_id), {})
        if emotion in by_emotion:
            raise MalformedTable(
                f"{path}: line {index}: duplicate {emotion.value} row for {row.participant_id}"
            )
        by_emotion[emotion] = vector
    return out
