"""
Seeded synthetic cohorts.

Stands in for the human study: each participant gets questionnaire answers
(balanced across the cohort), demographics, and a session of per-second IMU
samples recorded while five videos play in a fixed order. The magnitude mean
and std of every segment are planted:

    target = baseline × participant jitter × emotion intensity + Σ trait effects

and the noise process hits them exactly (the magnitude series is an AR(1)
sequence standardized to zero mean and unit std, then scaled). Vector
directions drift smoothly: acceleration around gravity, rotation anywhere.
Values are quantized to raw IMU counts so a session survives the wire
encoding unchanged.

Seeds: ``SeedSequence(seed).spawn(n + 1)``; child 0 draws cohort-level
answers, child i + 1 everything about participant i. Generating
participants in parallel therefore gives the same bytes as serially.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from ._version import __version__
from .errors import InvalidConfig, IoFailure
from .features import FEATURE_NAMES, FeatureVector
from .matrix import TRAITS, Gender, ParticipantRecord, TraitId, write_traits_csv
from .session import (
    EMOTIONS,
    EmotionState,
    ImuSample,
    Segment,
    Session,
    Timeline,
    Vec3,
    persist_session,
    write_timeline,
)
from .wire import INT16_MAX, INT16_MIN, ScaleConfig

logger = logging.getLogger(__name__)

VIDEO_ORDER: Tuple[EmotionState, ...] = (
    EmotionState.NEUTRAL,
    EmotionState.SAD,
    EmotionState.DISGUST,
    EmotionState.HAPPY,
    EmotionState.SURPRISE,
)
SEGMENT_LIMITS_MS = (90_000, 180_000)
AR_PHI = 0.3
DIRECTION_PHI = 0.9
ACC_DRIFT = 0.05

DEFAULT_BASELINE = FeatureVector(
    acc_mag_mean=1.0, acc_mag_std=0.03, gyro_mag_mean=8.0, gyro_mag_std=1.0
)

# (acc scale, gyro scale): grief damps movement, joy amplifies it
DEFAULT_INTENSITY: Dict[EmotionState, Tuple[float, float]] = {
    EmotionState.SAD: (0.96, 0.5),
    EmotionState.NEUTRAL: (1.0, 1.0),
    EmotionState.DISGUST: (1.03, 1.7),
    EmotionState.SURPRISE: (1.06, 2.6),
    EmotionState.HAPPY: (1.09, 3.8),
}


@dataclass(frozen=True)
class TraitEffect:
    """Additive shift of one feature target for participants holding a trait.

    Binary traits shift when the answer is "yes"; leveled traits shift once
    per level above the first. Only segments of ``emotions`` are affected.
    """

    trait: TraitId
    feature: str
    shift: float
    emotions: Tuple[EmotionState, ...] = EMOTIONS

    def multiplier(self, answer: str) -> int:
        if self.trait.domain == ("no", "yes"):
            return 1 if answer == "yes" else 0
        return self.trait.domain.index(answer)


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    n_participants: int = 46
    sample_period_ms: int = 1000
    segment_ms: Tuple[int, int] = SEGMENT_LIMITS_MS
    gap_ms: int = 5000
    baseline: FeatureVector = DEFAULT_BASELINE
    emotion_intensity: Mapping[EmotionState, Tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_INTENSITY)
    )
    trait_effects: Tuple[TraitEffect, ...] = ()
    # yes-probability per binary trait; None draws exactly balanced answers
    trait_prevalence: Optional[Mapping[TraitId, float]] = None
    jitter: float = 0.04
    female_share: float = 0.45
    age_range: Tuple[int, int] = (18, 45)
    scale: ScaleConfig = ScaleConfig()
    name: str = "custom"

    def validate(self) -> None:
        """Raises InvalidConfig naming the first offending field."""
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise InvalidConfig(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.n_participants < 4:
            raise InvalidConfig(f"n_participants must be >= 4, got {self.n_participants}")
        if self.sample_period_ms < 1:
            raise InvalidConfig(f"sample_period_ms must be >= 1, got {self.sample_period_ms}")
        lo, hi = self.segment_ms
        if not SEGMENT_LIMITS_MS[0] <= lo <= hi <= SEGMENT_LIMITS_MS[1]:
            raise InvalidConfig(
                f"segment_ms must lie within [{SEGMENT_LIMITS_MS[0]}, {SEGMENT_LIMITS_MS[1]}], "
                f"got {self.segment_ms}"
            )
        if self.sample_period_ms > lo:
            raise InvalidConfig("sample_period_ms is longer than the shortest segment")
        if self.gap_ms < 0:
            raise InvalidConfig(f"gap_ms must be >= 0, got {self.gap_ms}")
        missing = [e.label for e in EMOTIONS if e not in self.emotion_intensity]
        if missing:
            raise InvalidConfig(f"emotion_intensity lacks {', '.join(missing)}")
        for emotion, scales in self.emotion_intensity.items():
            if len(scales) != 2 or not all(s > 0 for s in scales):
                raise InvalidConfig(
                    f"intensity scales for {emotion.label} must be positive, got {scales}"
                )
        if self.baseline.acc_mag_mean <= 0 or self.baseline.gyro_mag_mean <= 0:
            raise InvalidConfig("baseline magnitude means must be positive")
        for effect in self.trait_effects:
            if effect.feature not in FEATURE_NAMES:
                raise InvalidConfig(f"unknown feature {effect.feature!r} in trait effect")
        if not 0 <= self.jitter < 0.5:
            raise InvalidConfig(f"jitter must be in [0, 0.5), got {self.jitter}")
        if not 0 <= self.female_share <= 1:
            raise InvalidConfig(f"female_share must be in [0, 1], got {self.female_share}")
        if not 0 < self.age_range[0] <= self.age_range[1]:
            raise InvalidConfig(f"age_range must be increasing and positive, got {self.age_range}")
        for trait, p in (self.trait_prevalence or {}).items():
            if trait is TraitId.FAST_FOOD_INTAKE or not 0 <= p <= 1:
                raise InvalidConfig(
                    f"prevalence {p!r} for {trait.value} is not a binary-trait probability"
                )


def null_preset(seed: int, n_participants: int = 46, **overrides) -> SynthConfig:
    """No signal at all: every emotion and participant profile looks the same."""
    flat = {e: (1.0, 1.0) for e in EMOTIONS}
    return SynthConfig(
        seed=seed, n_participants=n_participants, emotion_intensity=flat, name="null", **overrides
    )


STRONG_EFFECTS: Tuple[TraitEffect, ...] = (
    TraitEffect(TraitId.SMOKER, "gyro_mag_std", 2.5, (EmotionState.HAPPY,)),
    TraitEffect(TraitId.HEART_DISEASE_IN_FAMILY, "acc_mag_std", 0.03, (EmotionState.HAPPY,)),
    TraitEffect(TraitId.RELIGIOUS_PRACTITIONER, "gyro_mag_std", 1.2, (EmotionState.DISGUST,)),
    TraitEffect(TraitId.HIGH_SUGAR_INTAKE, "gyro_mag_std", 1.8, (EmotionState.SURPRISE,)),
    TraitEffect(TraitId.FAST_FOOD_INTAKE, "acc_mag_std", 0.025, (EmotionState.SURPRISE,)),
    TraitEffect(TraitId.HIGH_FAT_INTAKE, "acc_mag_std", 0.03, (EmotionState.SAD,)),
    TraitEffect(TraitId.DIABETES_IN_FAMILY, "acc_mag_std", 0.03, (EmotionState.NEUTRAL,)),
)


def strong_preset(seed: int, n_participants: int = 46, **overrides) -> SynthConfig:
    """Separable emotions and one planted (emotion, feature) slot per trait."""
    return SynthConfig(
        seed=seed,
        n_participants=n_participants,
        trait_effects=STRONG_EFFECTS,
        name="strong",
        **overrides,
    )


PRESETS = {"strong": strong_preset, "null": null_preset}


def preset(name: str, seed: int, **overrides) -> SynthConfig:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise InvalidConfig(f"unknown preset {name!r} (known: {', '.join(PRESETS)})") from None
    return factory(seed, **overrides)


@dataclass(frozen=True)
class SynthParticipant:
    record: ParticipantRecord
    session: Session
    timeline: Timeline
    targets: Dict[EmotionState, FeatureVector]


@dataclass(frozen=True)
class SynthCohort:
    config: SynthConfig
    participants: Tuple[SynthParticipant, ...]

    @property
    def records(self) -> List[ParticipantRecord]:
        return [p.record for p in self.participants]

    @property
    def sessions(self) -> List[Session]:
        return [p.session for p in self.participants]

    @property
    def timelines(self) -> List[Timeline]:
        return [p.timeline for p in self.participants]


# ---------------------------------------------------------------------------
# Noise processes
# ---------------------------------------------------------------------------
def _ar1(rng: np.random.Generator, n: int, phi: float) -> np.ndarray:
    e = rng.standard_normal(n)
    z = np.empty(n)
    z[0] = e[0]
    c = np.sqrt(1.0 - phi * phi)
    for t in range(1, n):
        z[t] = phi * z[t - 1] + c * e[t]
    return z


def magnitude_series(rng: np.random.Generator, n: int, mean: float, std: float) -> np.ndarray:
    """``n`` positive values with population mean ``mean`` and std ``std``."""
    z = _ar1(rng, n, AR_PHI)
    z -= z.mean()
    spread = z.std()
    z = z / spread if spread > 0 else np.zeros(n)
    return np.abs(mean + std * z)


def _directions(rng: np.random.Generator, n: int, anchor: np.ndarray, spread: float) -> np.ndarray:
    drift = np.column_stack([_ar1(rng, n, DIRECTION_PHI) for _ in range(3)])
    d = anchor + spread * drift
    norms = np.linalg.norm(d, axis=1, keepdims=True)
    return d / np.where(norms > 0, norms, 1.0)


def _quantize(values: np.ndarray, lsb: float, what: str) -> np.ndarray:
    counts = np.rint(values * lsb)
    if counts.min() < INT16_MIN or counts.max() > INT16_MAX:
        raise InvalidConfig(f"{what} targets exceed the 16-bit raw range of the scale config")
    return counts / lsb


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------
def participant_id(index: int) -> str:
    return f"P{index + 1:03d}"


def _balanced(rng: np.random.Generator, n: int, values: Sequence[str]) -> np.ndarray:
    k = len(values)
    counts = [n // k + (1 if i < n % k else 0) for i in range(k)]
    pool = np.array([v for v, c in zip(values, counts) for _ in range(c)], dtype=object)
    return rng.permutation(pool)


def _draw_answers(cfg: SynthConfig, rng: np.random.Generator) -> List[Dict[TraitId, str]]:
    n = cfg.n_participants
    columns = {}
    for trait in TRAITS:
        p = (cfg.trait_prevalence or {}).get(trait)
        if p is None:
            columns[trait] = _balanced(rng, n, trait.domain)
        else:
            columns[trait] = np.where(rng.random(n) < p, "yes", "no")
    return [{t: str(columns[t][i]) for t in TRAITS} for i in range(n)]


def _demographics(cfg: SynthConfig, rng: np.random.Generator) -> List[Tuple[int, Gender]]:
    n = cfg.n_participants
    females = int(round(cfg.female_share * n))
    genders = rng.permutation([Gender.FEMALE] * females + [Gender.MALE] * (n - females))
    ages = rng.integers(cfg.age_range[0], cfg.age_range[1] + 1, size=n)
    return [(int(a), g) for a, g in zip(ages, genders)]


def segment_targets(
    cfg: SynthConfig, answers: Mapping[TraitId, str], jitter: np.ndarray
) -> Dict[EmotionState, FeatureVector]:
    """Planted feature targets of one participant, per emotion."""
    base = cfg.baseline.as_array() * jitter
    out = {}
    for emotion in EMOTIONS:
        acc_scale, gyro_scale = cfg.emotion_intensity[emotion]
        target = base * np.array([acc_scale, acc_scale, gyro_scale, gyro_scale])
        for effect in cfg.trait_effects:
            if emotion in effect.emotions:
                target[FEATURE_NAMES.index(effect.feature)] += effect.shift * effect.multiplier(
                    answers[effect.trait]
                )
        if target[0] <= 0 or target[2] <= 0 or target[1] < 0 or target[3] < 0:
            raise InvalidConfig(
                f"trait effects push the {emotion.label} targets out of range: {target}"
            )
        out[emotion] = FeatureVector.from_array(target)
    return out


def _samples(
    cfg: SynthConfig, rng: np.random.Generator, times: np.ndarray, target: FeatureVector
) -> List[ImuSample]:
    n = len(times)
    acc_mag = magnitude_series(rng, n, target.acc_mag_mean, target.acc_mag_std)
    gyro_mag = magnitude_series(rng, n, target.gyro_mag_mean, target.gyro_mag_std)
    acc = _quantize(
        acc_mag[:, None] * _directions(rng, n, np.array([0.0, 0.0, 1.0]), ACC_DRIFT),
        cfg.scale.acc_lsb_per_g,
        "acceleration",
    )
    gyro = _quantize(
        gyro_mag[:, None] * _directions(rng, n, np.zeros(3), 1.0),
        cfg.scale.gyro_lsb_per_dps,
        "rotation",
    )
    return [
        ImuSample(int(t), Vec3(*a), Vec3(*g)) for t, a, g in zip(times, acc.tolist(), gyro.tolist())
    ]


def _participant(
    cfg: SynthConfig,
    index: int,
    seed: np.random.SeedSequence,
    answers: Dict[TraitId, str],
    demographics: Tuple[int, Gender],
) -> SynthParticipant:
    rng = np.random.default_rng(seed)
    pid = participant_id(index)
    jitter = 1.0 + cfg.jitter * rng.standard_normal(len(FEATURE_NAMES))
    targets = segment_targets(cfg, answers, jitter)
    resting = FeatureVector.from_array(cfg.baseline.as_array() * jitter)

    lo_s, hi_s = cfg.segment_ms[0] // 1000, cfg.segment_ms[1] // 1000
    period = cfg.sample_period_ms
    samples: List[ImuSample] = []
    segments = []
    cursor = 0
    for position, emotion in enumerate(VIDEO_ORDER):
        end = cursor + int(rng.integers(lo_s, hi_s + 1)) * 1000
        end = min(max(end, cursor + cfg.segment_ms[0]), cursor + cfg.segment_ms[1])
        segments.append(Segment(emotion, cursor, end))
        samples += _samples(cfg, rng, np.arange(cursor, end, period), targets[emotion])
        cursor = end
        if position < len(VIDEO_ORDER) - 1 and cfg.gap_ms:
            # transition between videos: resting motion, outside every segment
            gap = np.arange(cursor, cursor + cfg.gap_ms, period)
            if len(gap):
                samples += _samples(cfg, rng, gap, resting)
            cursor += cfg.gap_ms
    age, gender = demographics
    record = ParticipantRecord(pid, age, gender, answers)
    session = Session(pid, tuple(samples))
    return SynthParticipant(record, session, Timeline(tuple(segments)), targets)


def generate_cohort(cfg: SynthConfig, jobs: int = 1) -> SynthCohort:
    """Generate every participant of ``cfg``; a pure function of the config.

    Raises:
        InvalidConfig: the config is out of range.
    """
    cfg.validate()
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_participants + 1)
    cohort_rng = np.random.default_rng(children[0])
    answers = _draw_answers(cfg, cohort_rng)
    demographics = _demographics(cfg, cohort_rng)
    participants = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(_participant)(cfg, i, children[i + 1], answers[i], demographics[i])
        for i in range(cfg.n_participants)
    )
    logger.info(
        "generated %s cohort: %d participants, seed %d", cfg.name, cfg.n_participants, cfg.seed
    )
    return SynthCohort(cfg, tuple(participants))


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------
def manifest(cohort: SynthCohort) -> Dict[str, object]:
    """Ground truth of a cohort (answers, segments, planted targets)."""
    cfg = cohort.config
    return {
        "generator": f"headmotion {__version__}",
        "preset": cfg.name,
        "seed": cfg.seed,
        "n_participants": cfg.n_participants,
        "sample_period_ms": cfg.sample_period_ms,
        "gap_ms": cfg.gap_ms,
        "video_order": [e.label for e in VIDEO_ORDER],
        "trait_effects": [
            {
                "trait": e.trait.value,
                "feature": e.feature,
                "shift": e.shift,
                "emotions": [em.label for em in e.emotions],
            }
            for e in cfg.trait_effects
        ],
        "participants": [
            {
                "participant_id": p.record.id,
                "age": p.record.age,
                "gender": p.record.gender.value,
                "answers": {t.value: p.record.answers[t] for t in TRAITS},
                "n_samples": len(p.session),
                "segments": [
                    {"emotion": s.emotion.label, "start_ms": s.start_ms, "end_ms": s.end_ms}
                    for s in p.timeline
                ],
                "targets": {
                    e.label: {name: getattr(p.targets[e], name) for name in FEATURE_NAMES}
                    for e in EMOTIONS
                },
            }
            for p in cohort.participants
        ],
    }


def write_cohort(cohort: SynthCohort, out_dir: Union[str, Path]) -> List[Path]:
    """Write P###.jsonl, P###.timeline.csv, traits.csv and manifest.json; returns the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoFailure(f"cannot create {out}: {e.strerror or e}") from e
    written = []
    for p in cohort.participants:
        session_path = out / f"{p.record.id}.jsonl"
        timeline_path = out / f"{p.record.id}.timeline.csv"
        persist_session(p.session, session_path)
        write_timeline(p.timeline, timeline_path)
        written += [session_path, timeline_path]
    traits_path = out / "traits.csv"
    write_traits_csv(cohort.records, traits_path)
    manifest_path = out / "manifest.json"
    try:
        manifest_path.write_text(json.dumps(manifest(cohort), indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write {manifest_path}: {e.strerror or e}") from e
    written += [traits_path, manifest_path]
    logger.info("wrote %d files to %s", len(written), out)
    return written
