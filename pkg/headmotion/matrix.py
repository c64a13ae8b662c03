"""
The trait × emotion model matrix.

For each of the 7 questionnaire traits and each of the 5 emotions one model
is selected from the classifier pool, trained on one row per participant
(that participant's features under that emotion, labeled with their answer):
35 cells. One more model learns the emotion itself from all participant ×
emotion rows. A trait is predicted with the cell of its best emotion, by
training accuracy by default.

Report document (``render_report``)::

    {
      "n_participants": 46, "k": 5, "seed": 7, "aggregate": "resubstitution",
      "pool": ["OneR(bins=6)", ...],
      "cells": [ {trait, emotion, classifier, accuracy, accuracy_fraction,
                  cv_success_rate, cv_fraction, tp_rate, fp_rate, precision,
                  recall, f1, candidates: [...]}, ... 35 rows ],
      "best_per_trait": [ {trait, question, emotion, classifier, ...}, ... 7 rows ],
      "emotion_model": {classifier, accuracy, ..., labels, confusion}
    }

Undefined weighted metrics are the string "NAN".
"""

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import joblib
import pandas as pd
from joblib import Parallel, delayed

from .classifiers import ClassifierSpec
from .config import AGGREGATE_CHOICES
from .errors import (
    DegenerateTrait,
    IoFailure,
    MalformedTable,
    MissingEmotion,
    MissingEmotionFeatures,
)
from .features import FeatureVector, read_features_csv
from .learn import DEFAULT_K, DEFAULT_POOL, Dataset, SelectionResult, predict, select_best
from .metrics import MetricsReport, format_percent
from .session import EMOTIONS, EmotionState

logger = logging.getLogger(__name__)

BINARY = ("no", "yes")
LEVELS = ("Low", "Medium", "High")
MATRIX_FILE = "matrix.joblib"


class TraitId(Enum):
    """The seven questionnaire traits; values are the traits CSV column names."""

    SMOKER = "smoker"
    RELIGIOUS_PRACTITIONER = "religious_practitioner"
    FAST_FOOD_INTAKE = "fast_food_intake"
    HIGH_FAT_INTAKE = "high_fat_intake"
    HIGH_SUGAR_INTAKE = "high_sugar_intake"
    HEART_DISEASE_IN_FAMILY = "heart_disease_in_family"
    DIABETES_IN_FAMILY = "diabetes_in_family"

    @property
    def question(self) -> str:
        return _QUESTIONS[self]

    @property
    def domain(self) -> Tuple[str, ...]:
        """Allowed answers, in order (the label-domain order of every cell)."""
        return LEVELS if self is TraitId.FAST_FOOD_INTAKE else BINARY

    @property
    def label(self) -> str:
        return self.value.replace("_", " ").capitalize()

    def normalize(self, answer: str) -> str:
        """Map a case-insensitive answer onto the domain spelling."""
        lookup = {value.lower(): value for value in self.domain}
        try:
            return lookup[str(answer).strip().lower()]
        except KeyError:
            raise ValueError(
                f"{self.value} must be one of {', '.join(self.domain)}, got {answer!r}"
            ) from None


_QUESTIONS = {
    TraitId.SMOKER: "Are you a smoker?",
    TraitId.RELIGIOUS_PRACTITIONER: "Do you pray regularly?",
    TraitId.FAST_FOOD_INTAKE: "How many fast food meals in a week?",
    TraitId.HIGH_FAT_INTAKE: "Do you take high fat food?",
    TraitId.HIGH_SUGAR_INTAKE: "Do you take high sugar food?",
    TraitId.HEART_DISEASE_IN_FAMILY: "Does anybody in your family have heart disease?",
    TraitId.DIABETES_IN_FAMILY: "Does anybody in your family have Diabetes?",
}

TRAITS: Tuple[TraitId, ...] = tuple(TraitId)


class Gender(Enum):
    FEMALE = "female"
    MALE = "male"


@dataclass(frozen=True)
class ParticipantRecord:
    """Questionnaire answers and demographics. Demographics are never features."""

    id: str
    age: int
    gender: Gender
    answers: Mapping[TraitId, str]

    def __post_init__(self):
        missing = [t.value for t in TRAITS if t not in self.answers]
        if missing:
            raise ValueError(f"participant {self.id!r} has no answer for {', '.join(missing)}")
        answers = {t: t.normalize(self.answers[t]) for t in TRAITS}
        object.__setattr__(self, "answers", answers)


@dataclass(frozen=True)
class ParticipantFeatures:
    record: ParticipantRecord
    features: Mapping[EmotionState, FeatureVector]

    @property
    def id(self) -> str:
        return self.record.id


@dataclass(frozen=True)
class CohortFeatures:
    participants: Tuple[ParticipantFeatures, ...]

    def __post_init__(self):
        object.__setattr__(self, "participants", tuple(self.participants))

    def __len__(self) -> int:
        return len(self.participants)

    def __iter__(self) -> Iterator[ParticipantFeatures]:
        return iter(self.participants)


@dataclass(frozen=True, eq=False)
class ModelMatrix:
    grid: Dict[Tuple[TraitId, EmotionState], SelectionResult]
    emotion_model: SelectionResult
    n_participants: int
    k: int
    seed: int
    pool: Tuple[ClassifierSpec, ...]
    aggregate: str = "resubstitution"

    def cell(self, trait: TraitId, emotion: EmotionState) -> SelectionResult:
        return self.grid[(trait, emotion)]

    def metrics(self, trait: TraitId, emotion: EmotionState) -> MetricsReport:
        return self.grid[(trait, emotion)].metrics()


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------
def check_cohort(cohort: CohortFeatures) -> None:
    """Raises MissingEmotion for the first participant lacking any emotion."""
    for participant in cohort:
        missing = [e for e in EMOTIONS if e not in participant.features]
        if missing:
            raise MissingEmotion(participant.id, missing)


def trait_dataset(cohort: CohortFeatures, trait: TraitId, emotion: EmotionState) -> Dataset:
    """One row per participant: features under ``emotion`` labeled with the ``trait`` answer.

    The label domain is the answers present, in domain order.

    Raises:
        DegenerateTrait: every participant gives the same answer.
    """
    rows = [(p.features[emotion], p.record.answers[trait]) for p in cohort]
    present = {label for _, label in rows}
    if len(present) < 2:
        raise DegenerateTrait(trait, next(iter(present), "<none>"))
    return Dataset.from_rows(rows, [v for v in trait.domain if v in present])


def emotion_dataset(cohort: CohortFeatures) -> Dataset:
    """One row per (participant, emotion), labeled with the emotion."""
    rows = [(p.features[e], e.label) for p in cohort for e in EMOTIONS]
    return Dataset.from_rows(rows, [e.label for e in EMOTIONS])


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------
def train_matrix(
    cohort: CohortFeatures,
    pool: Sequence[ClassifierSpec] = DEFAULT_POOL,
    k: int = DEFAULT_K,
    seed: int = 0,
    jobs: int = 1,
    aggregate: str = "resubstitution",
) -> ModelMatrix:
    """Select a model for each of the 35 cells plus the emotion model.

    The 36 selections are independent and run on a joblib thread pool of
    ``jobs`` workers; the grid is assembled by key, in trait × emotion order.

    Raises:
        MissingEmotion: a participant lacks features for some emotion.
        DegenerateTrait: a trait has a single answer across the cohort.
    """
    if aggregate not in AGGREGATE_CHOICES:
        choices = ", ".join(AGGREGATE_CHOICES)
        raise ValueError(f"aggregate must be one of {choices}, got {aggregate!r}")
    check_cohort(cohort)
    pool = tuple(pool)
    keys = [(t, e) for t in TRAITS for e in EMOTIONS]
    datasets = [trait_dataset(cohort, t, e) for t, e in keys]
    datasets.append(emotion_dataset(cohort))

    logger.info(
        "training %d models on %d participants (k=%d, %d job(s))",
        len(datasets),
        len(cohort),
        k,
        jobs,
    )
    results = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(select_best)(data, pool, k, seed) for data in datasets
    )
    grid = {}
    for (trait, emotion), result in zip(keys, results):
        grid[(trait, emotion)] = result
        logger.info(
            "%-24s %-9s %-16s resub %s  cv %s",
            trait.value,
            emotion.label,
            result.best_spec.kind,
            result.resubstitution_fraction,
            result.cv_fraction,
        )
    emotion_model = results[-1]
    logger.info(
        "emotion model: %s resub %s cv %s",
        emotion_model.best_spec.kind,
        emotion_model.resubstitution_fraction,
        emotion_model.cv_fraction,
    )
    return ModelMatrix(grid, emotion_model, len(cohort), k, seed, pool, aggregate)


# ---------------------------------------------------------------------------
# Aggregation and prediction
# ---------------------------------------------------------------------------
def best_emotion(scores: Mapping[EmotionState, float]) -> EmotionState:
    """Emotion with the highest score; ties go to the earliest in EMOTIONS order."""
    candidates = [e for e in EMOTIONS if e in scores]
    if not candidates:
        raise ValueError("no emotion scores to choose from")
    return max(candidates, key=lambda e: scores[e])


def best_per_trait(
    m: ModelMatrix, key: Optional[str] = None
) -> Dict[TraitId, Tuple[EmotionState, SelectionResult]]:
    """Per trait, the emotion cell with the best score under ``key`` (default: the matrix's)."""
    key = key or m.aggregate
    out = {}
    for trait in TRAITS:
        emotion = best_emotion({e: m.grid[(trait, e)].score(key) for e in EMOTIONS})
        out[trait] = (emotion, m.grid[(trait, emotion)])
    return out


def predict_trait(
    m: ModelMatrix,
    participant_features: Mapping[EmotionState, FeatureVector],
    t: TraitId,
    key: Optional[str] = None,
) -> str:
    """Answer to trait ``t`` from the participant's features under the trait's best emotion.

    Raises:
        MissingEmotionFeatures: the participant has no features for that emotion.
    """
    emotion, result = best_per_trait(m, key)[t]
    if emotion not in participant_features:
        raise MissingEmotionFeatures(t, emotion)
    return predict(result.best_model, participant_features[emotion])


def predict_emotion(m: ModelMatrix, x: FeatureVector) -> EmotionState:
    return EmotionState.parse(predict(m.emotion_model.best_model, x))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------
def _result_row(result: SelectionResult, with_candidates: bool = True) -> Dict[str, object]:
    cm = result.resubstitution_confusion
    metrics = result.metrics().to_dict()
    # "accuracy" in a report row is a percentage; the 0..1 rate moves aside
    metrics["accuracy_rate"] = metrics.pop("accuracy")
    row: Dict[str, object] = {
        "classifier": result.best_spec.describe(),
        "accuracy": round(100.0 * cm.correct / cm.total, 4),
        "accuracy_fraction": result.resubstitution_fraction,
        "cv_success_rate": result.cv_success_rate,
        "cv_fraction": result.cv_fraction,
        "k": result.k,
    }
    row.update(metrics)
    if with_candidates:
        row["candidates"] = [
            {
                "classifier": c.spec.describe(),
                "cv_success_rate": c.cv_success_rate,
                "cv_fraction": c.cv_fraction,
            }
            for c in result.per_candidate
        ]
    return row


def render_report(m: ModelMatrix) -> Dict[str, object]:
    cells = []
    for trait in TRAITS:
        for emotion in EMOTIONS:
            row = {"trait": trait.value, "emotion": emotion.label}
            row.update(_result_row(m.grid[(trait, emotion)]))
            cells.append(row)
    best_rows = []
    for trait, (emotion, result) in best_per_trait(m).items():
        row = {"trait": trait.value, "question": trait.question, "emotion": emotion.label}
        row.update(_result_row(result, with_candidates=False))
        best_rows.append(row)
    emotion_row = _result_row(m.emotion_model)
    emotion_row["labels"] = list(m.emotion_model.resubstitution_confusion.labels)
    emotion_row["confusion"] = m.emotion_model.resubstitution_confusion.to_lists()
    return {
        "n_participants": m.n_participants,
        "k": m.k,
        "seed": m.seed,
        "aggregate": m.aggregate,
        "pool": [spec.describe() for spec in m.pool],
        "cells": cells,
        "best_per_trait": best_rows,
        "emotion_model": emotion_row,
    }


def dump_report(report: Mapping[str, object]) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def write_report(report: Mapping[str, object], path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dump_report(report), encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write report {path}: {e.strerror or e}") from e


def _pct(value) -> str:
    return value if isinstance(value, str) else format_percent(value)


def _table(rows: List[Dict[str, object]], leading: Sequence[str]) -> str:
    frame = pd.DataFrame(
        [
            {
                **{name: row[name] for name in leading},
                "classifier": str(row["classifier"]).split("(")[0],
                "acc%": f"{row['accuracy']:.1f}",
                "acc": row["accuracy_fraction"],
                "cv%": format_percent(row["cv_success_rate"]),
                "TPR": _pct(row["tp_rate"]),
                "FPR": _pct(row["fp_rate"]),
                "Prec": _pct(row["precision"]),
                "Rec": _pct(row["recall"]),
                "F1": _pct(row["f1"]),
            }
            for row in rows
        ]
    )
    return frame.to_string(index=False)


def render_text(report: Mapping[str, object]) -> str:
    """Aligned-text rendering: trait cells, best emotion per trait, emotion model."""
    parts = [
        f"participants: {report['n_participants']}  k: {report['k']}  seed: {report['seed']}  "
        f"aggregate: {report['aggregate']}",
        "",
        "Trait models",
        _table(report["cells"], ("trait", "emotion")),
        "",
        "Best emotion per trait",
        _table(report["best_per_trait"], ("trait", "emotion")),
        "",
        "Emotion model",
        _table([report["emotion_model"]], ()),
    ]
    questions = [f"  {row['trait']}: {row['question']}" for row in report["best_per_trait"]]
    parts += ["", "Questions"] + questions
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------
def save_matrix(m: ModelMatrix, models_dir: Union[str, Path]) -> Path:
    """Persist ``m`` as ``<models_dir>/matrix.joblib``; returns the file path."""
    path = Path(models_dir) / MATRIX_FILE
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        joblib.dump(m, path)
    except OSError as e:
        raise IoFailure(f"cannot write models {path}: {e.strerror or e}") from e
    return path


def load_matrix(models_dir: Union[str, Path]) -> ModelMatrix:
    path = Path(models_dir)
    if path.is_dir():
        path = path / MATRIX_FILE
    try:
        m = joblib.load(path)
    except OSError as e:
        raise IoFailure(f"cannot read models {path}: {e.strerror or e}") from e
    if not isinstance(m, ModelMatrix):
        raise MalformedTable(f"{path} does not hold a trained model matrix")
    return m


# ---------------------------------------------------------------------------
# Traits CSV and cohort loading
# ---------------------------------------------------------------------------
TRAITS_CSV_COLUMNS = ("participant_id",) + tuple(t.value for t in TRAITS) + ("age", "gender")


def traits_frame(records: Sequence[ParticipantRecord]) -> pd.DataFrame:
    return pd.DataFrame.from_records(
        [
            {
                "participant_id": r.id,
                **{t.value: r.answers[t] for t in TRAITS},
                "age": r.age,
                "gender": r.gender.value,
            }
            for r in records
        ],
        columns=list(TRAITS_CSV_COLUMNS),
    )


def write_traits_csv(records: Sequence[ParticipantRecord], path: Union[str, Path]) -> None:
    try:
        traits_frame(records).to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise IoFailure(f"cannot write traits {path}: {e.strerror or e}") from e


def read_traits_csv(path: Union[str, Path]) -> List[ParticipantRecord]:
    """Records in file order.

    Raises:
        MalformedTable: missing columns, duplicate ids or out-of-domain values.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except OSError as e:
        raise IoFailure(f"cannot read traits {path}: {e.strerror or e}") from e
    missing = [c for c in TRAITS_CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedTable(f"{path}: missing column(s) {', '.join(missing)}")
    records = []
    seen = set()
    for line, row in enumerate(frame.to_dict("records"), start=2):
        pid = row["participant_id"].strip()
        if pid in seen:
            raise MalformedTable(f"{path}: line {line}: duplicate participant {pid!r}")
        seen.add(pid)
        try:
            records.append(
                ParticipantRecord(
                    id=pid,
                    age=int(row["age"]),
                    gender=Gender(row["gender"].strip().lower()),
                    answers={t: row[t.value] for t in TRAITS},
                )
            )
        except ValueError as e:
            raise MalformedTable(f"{path}: line {line}: {e}") from None
    return records


def load_cohort(features_csv: Union[str, Path], traits_csv: Union[str, Path]) -> CohortFeatures:
    """Join the features CSV and the traits CSV, in traits-file order.

    Raises:
        MalformedTable: features exist for a participant without a traits row.
        MissingEmotion: a participant lacks features for some emotion.
    """
    features = read_features_csv(features_csv)
    records = read_traits_csv(traits_csv)
    known = {r.id for r in records}
    orphans = sorted(set(features) - known)
    if orphans:
        raise MalformedTable(f"{traits_csv}: no traits for participant(s) {', '.join(orphans)}")
    cohort = CohortFeatures(
        tuple(ParticipantFeatures(r, features.get(r.id, {})) for r in records)
    )
    check_cohort(cohort)
    return cohort
