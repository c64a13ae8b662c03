"""
Datasets, model fitting, stratified k-fold cross-validation and
best-success-rate model selection over a classifier pool.

    data = Dataset.from_rows(rows, label_domain=("no", "yes"))
    result = select_best(data, DEFAULT_POOL, k=5, seed=7)
    result.best_spec, result.cv_success_rate, predict(result.best_model, x)

Everything here is a deterministic function of its inputs and seed.
Candidates of one selection may be evaluated on a joblib thread pool; the
winner is reduced over pool order, so the result does not depend on
scheduling.
"""

import logging
from dataclasses import dataclass, fields
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .classifiers import (
    SPEC_BY_ALIAS,
    AdaBoostStumps,
    ClassifierSpec,
    DecisionTree,
    Estimator,
    KNN,
    Logistic,
    OneR,
    RandomForest,
)
from .errors import DegenerateDataset, InvalidHyperparameters, LabelDomainMismatch, TooFewRows
from .features import FEATURE_NAMES, FeatureVector
from .metrics import ConfusionMatrix, MetricsReport, weighted_metrics

logger = logging.getLogger(__name__)

DEFAULT_K = 5

DEFAULT_POOL: Tuple[ClassifierSpec, ...] = (
    OneR(bins=6),
    KNN(k=3),
    DecisionTree(max_depth=4, min_leaf=2),
    RandomForest(n_trees=25, max_depth=4, feature_subsample=2, seed=0),
    Logistic(epochs=300, learning_rate=0.1, l2=1e-3),
    AdaBoostStumps(rounds=20),
)


@dataclass(frozen=True)
class Dataset:
    """Labeled feature rows over an ordered label domain."""

    rows: Tuple[Tuple[FeatureVector, str], ...]
    label_domain: Tuple[str, ...]

    def __post_init__(self):
        rows = tuple((features, str(label)) for features, label in self.rows)
        domain = tuple(str(label) for label in self.label_domain)
        if len(set(domain)) != len(domain):
            raise ValueError(f"label_domain has duplicates: {domain}")
        unknown = sorted({label for _, label in rows} - set(domain))
        if unknown:
            raise LabelDomainMismatch(f"labels {unknown} are not in the label domain {domain}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "label_domain", domain)

    @classmethod
    def from_rows(
        cls, rows: Iterable[Tuple[FeatureVector, str]], label_domain: Optional[Sequence[str]] = None
    ) -> "Dataset":
        """Build a Dataset; without ``label_domain`` the labels keep first-seen order."""
        rows = tuple(rows)
        if label_domain is None:
            label_domain = tuple(dict.fromkeys(label for _, label in rows))
        return cls(rows, tuple(label_domain))

    def __len__(self) -> int:
        return len(self.rows)

    def features(self) -> np.ndarray:
        if not self.rows:
            return np.empty((0, len(FEATURE_NAMES)))
        return np.vstack([features.as_array() for features, _ in self.rows])

    def targets(self) -> np.ndarray:
        """Row labels as indices into label_domain."""
        index = {label: i for i, label in enumerate(self.label_domain)}
        return np.array([index[label] for _, label in self.rows], dtype=np.int64)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.targets(), minlength=len(self.label_domain))


@dataclass(frozen=True, eq=False)
class Model:
    """A fitted classifier. Predicts only labels from ``label_domain``."""

    spec: ClassifierSpec
    label_domain: Tuple[str, ...]
    estimator: Estimator

    def predict_indices(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64).reshape(-1, len(FEATURE_NAMES))
        return self.estimator.predict(X)

    def predict_many(self, xs: Sequence[FeatureVector]) -> List[str]:
        if not xs:
            return []
        X = np.vstack([x.as_array() for x in xs])
        return [self.label_domain[i] for i in self.predict_indices(X)]


@dataclass(frozen=True)
class CandidateScore:
    spec: ClassifierSpec
    cv_success_rate: float
    cv_correct: int
    n_rows: int

    @property
    def cv_fraction(self) -> str:
        return f"{self.cv_correct}/{self.n_rows}"


@dataclass(frozen=True)
class CrossValidation:
    success_rate: float
    confusion: ConfusionMatrix
    k: int


@dataclass(frozen=True, eq=False)
class SelectionResult:
    best_spec: ClassifierSpec
    best_model: Model
    cv_success_rate: float
    resubstitution_accuracy: float
    per_candidate: Tuple[CandidateScore, ...]
    cv_confusion: ConfusionMatrix
    resubstitution_confusion: ConfusionMatrix
    k: int

    @property
    def resubstitution_fraction(self) -> str:
        """Exact accuracy, unreduced: ``39/40``."""
        cm = self.resubstitution_confusion
        return f"{cm.correct}/{cm.total}"

    @property
    def cv_fraction(self) -> str:
        cm = self.cv_confusion
        return f"{cm.correct}/{cm.total}"

    def metrics(self) -> MetricsReport:
        """Weighted metrics of the winner on its own training rows."""
        return weighted_metrics(self.resubstitution_confusion)

    def score(self, key: str) -> float:
        """Aggregation key: ``"resubstitution"`` or ``"cv"``."""
        if key == "resubstitution":
            return self.resubstitution_accuracy
        if key == "cv":
            return self.cv_success_rate
        raise ValueError(f"unknown aggregation key {key!r}")


# ---------------------------------------------------------------------------
# fit / predict
# ---------------------------------------------------------------------------
def _fit_arrays(
    spec: ClassifierSpec, X: np.ndarray, y: np.ndarray, domain: Tuple[str, ...]
) -> Model:
    # no label-count check: cross-validation folds may hold a single class
    estimator = spec.build().fit(X, y, len(domain))
    return Model(spec, domain, estimator)


def _require_two_labels(data: Dataset, what: str) -> None:
    present = int(np.count_nonzero(data.class_counts())) if len(data) else 0
    if present < 2:
        raise DegenerateDataset(f"need at least 2 distinct labels to train {what}, got {present}")


def fit(spec: ClassifierSpec, data: Dataset) -> Model:
    """Train ``spec`` on every row of ``data``.

    Raises:
        InvalidHyperparameters: a hyperparameter is out of range.
        DegenerateDataset: fewer than two distinct labels occur in ``data``.
    """
    spec.validate()
    _require_two_labels(data, spec.kind)
    return _fit_arrays(spec, data.features(), data.targets(), data.label_domain)


def predict(model: Model, x: FeatureVector) -> str:
    return model.label_domain[int(model.predict_indices(x.as_array())[0])]


def confusion(model: Model, data: Dataset) -> ConfusionMatrix:
    """Counts of (actual, predicted) over every row, indexed by the model's domain.

    Raises:
        LabelDomainMismatch: ``data`` uses labels the model cannot predict.
    """
    missing = [label for label in data.label_domain if label not in model.label_domain]
    if missing:
        raise LabelDomainMismatch(
            f"dataset labels {missing} are outside the model domain {model.label_domain}"
        )
    if not len(data):
        return ConfusionMatrix.zeros(model.label_domain)
    index = {label: i for i, label in enumerate(model.label_domain)}
    actual = [index[label] for _, label in data.rows]
    predicted = model.predict_indices(data.features())
    return ConfusionMatrix.from_indices(model.label_domain, actual, predicted)


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------
def effective_k(data: Dataset, k: int) -> int:
    """``k`` lowered to the smallest class count (never below 2).

    Raises:
        InvalidHyperparameters: k < 2.
        TooFewRows: fewer than 2 rows, or fewer rows than folds.
    """
    if isinstance(k, bool) or not isinstance(k, int) or k < 2:
        raise InvalidHyperparameters(f"k must be an integer >= 2, got {k!r}")
    counts = data.class_counts() if len(data) else np.zeros(0, dtype=np.int64)
    present = counts[counts > 0]
    k_eff = k
    if len(present) and present.min() < k:
        k_eff = max(2, int(present.min()))
        logger.debug(
            "lowering k from %d to %d (smallest class has %d rows)", k, k_eff, present.min()
        )
    if len(data) < 2 or len(data) < k_eff:
        raise TooFewRows(f"{len(data)} row(s) cannot be split into {k_eff} folds")
    return k_eff


def stratified_folds(targets: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Fold index per row: each class is shuffled, then classes are dealt round-robin."""
    rng = np.random.default_rng(seed)
    order = []
    for cls in np.unique(targets):
        members = np.flatnonzero(targets == cls)
        rng.shuffle(members)
        order.append(members)
    folds = np.empty(len(targets), dtype=np.int64)
    folds[np.concatenate(order)] = np.arange(len(targets)) % k
    return folds


def cross_validate(
    spec: ClassifierSpec, data: Dataset, k: int = DEFAULT_K, seed: int = 0
) -> CrossValidation:
    """Stratified k-fold CV; the held-out predictions are pooled into one confusion matrix."""
    spec.validate()
    k_eff = effective_k(data, k)
    X, y = data.features(), data.targets()
    folds = stratified_folds(y, k_eff, seed)
    predicted = np.empty(len(y), dtype=np.int64)
    for f in range(k_eff):
        test = folds == f
        model = _fit_arrays(spec, X[~test], y[~test], data.label_domain)
        predicted[test] = model.predict_indices(X[test])
    cm = ConfusionMatrix.from_indices(data.label_domain, y, predicted)
    return CrossValidation(cm.correct / cm.total, cm, k_eff)


def k_fold_cv(spec: ClassifierSpec, data: Dataset, k: int = DEFAULT_K, seed: int = 0) -> float:
    """Success rate: pooled correct held-out predictions / total rows."""
    return cross_validate(spec, data, k, seed).success_rate


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------
def select_best(
    data: Dataset,
    pool: Sequence[ClassifierSpec] = DEFAULT_POOL,
    k: int = DEFAULT_K,
    seed: int = 0,
    jobs: int = 1,
) -> SelectionResult:
    """Cross-validate every pool member and keep the best (earliest on ties).

    The winner is retrained on all rows; its resubstitution accuracy is
    recorded next to its cv rate.
    """
    pool = tuple(pool)
    if not pool:
        raise InvalidHyperparameters("the classifier pool is empty")
    for spec in pool:
        spec.validate()
    _require_two_labels(data, "a pool")
    effective_k(data, k)
    runs = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(cross_validate)(spec, data, k, seed) for spec in pool
    )
    table = tuple(
        CandidateScore(spec, run.success_rate, run.confusion.correct, run.confusion.total)
        for spec, run in zip(pool, runs)
    )
    for score in table:
        logger.debug("  %-60s cv %s", score.spec.describe(), score.cv_fraction)
    # integer comparison: every candidate is scored on the same rows
    winner = max(range(len(pool)), key=lambda i: table[i].cv_correct)
    best = table[winner]
    assert all(best.cv_success_rate >= s.cv_success_rate for s in table)

    model = fit(best.spec, data)
    resub = confusion(model, data)
    return SelectionResult(
        best_spec=best.spec,
        best_model=model,
        cv_success_rate=best.cv_success_rate,
        resubstitution_accuracy=resub.correct / resub.total,
        per_candidate=table,
        cv_confusion=runs[winner].confusion,
        resubstitution_confusion=resub,
        k=runs[winner].k,
    )


# ---------------------------------------------------------------------------
# Pool strings
# ---------------------------------------------------------------------------
def _convert(spec_cls, name: str, raw: str):
    field_types = {f.name: f.type for f in fields(spec_cls)}
    if name not in field_types:
        raise InvalidHyperparameters(
            f"{spec_cls.kind} has no parameter {name!r} (known: {', '.join(field_types)})"
        )
    kind = field_types[name]
    try:
        return float(raw) if kind in (float, "float") else int(raw)
    except ValueError:
        raise InvalidHyperparameters(f"{spec_cls.kind}.{name}: cannot parse {raw!r}") from None


def parse_pool(text: str) -> Tuple[ClassifierSpec, ...]:
    """Build a pool from ``"oner,knn:k=1,forest:n_trees=10:seed=3"``.

    Entries are comma separated, parameters colon separated. ``default``
    expands to DEFAULT_POOL. Unset parameters keep their defaults.
    """
    pool: List[ClassifierSpec] = []
    for entry in (part.strip() for part in text.split(",")):
        if not entry:
            continue
        name, *params = entry.split(":")
        name = name.strip().lower()
        if name == "default":
            pool.extend(DEFAULT_POOL)
            continue
        spec_cls = SPEC_BY_ALIAS.get(name)
        if spec_cls is None:
            raise InvalidHyperparameters(
                f"unknown classifier {name!r} (known: {', '.join(sorted(SPEC_BY_ALIAS))})"
            )
        kwargs = {}
        for param in params:
            key, sep, raw = param.partition("=")
            if not sep:
                raise InvalidHyperparameters(f"expected key=value in {entry!r}, got {param!r}")
            kwargs[key.strip()] = _convert(spec_cls, key.strip(), raw.strip())
        spec = spec_cls(**kwargs)
        spec.validate()
        pool.append(spec)
    if not pool:
        raise InvalidHyperparameters(f"no classifiers in pool {text!r}")
    return tuple(pool)
