"""
Confusion matrices and support-weighted one-vs-rest metrics.

Rows of a ConfusionMatrix are actual labels, columns predicted labels. Per
class c (support_c = row sum, predicted_c = column sum, N = total):

    TPR_c  = TP_c / support_c              (= recall_c)
    FPR_c  = FP_c / (N - support_c)        (0 when no negatives exist)
    Prec_c = TP_c / predicted_c            (undefined when predicted_c = 0)
    F1_c   = 2 Prec_c Rec_c / (Prec_c + Rec_c)   (0 when both are 0)

Weighted metrics average over classes with weight support_c / N. A class
with support that is never predicted leaves precision (and so F1)
undefined; undefined values are rendered "NAN".
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EmptyMatrix

NAN = "NAN"


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    labels: Tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        counts = np.array(self.counts, dtype=np.int64)
        if counts.shape != (len(labels), len(labels)):
            size = len(labels)
            raise ValueError(
                f"counts must be {size}x{size} for labels {labels}, got {counts.shape}"
            )
        if (counts < 0).any():
            raise ValueError("confusion counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def zeros(cls, labels: Sequence[str]) -> "ConfusionMatrix":
        return cls(tuple(labels), np.zeros((len(labels), len(labels)), dtype=np.int64))

    @classmethod
    def from_indices(
        cls, labels: Sequence[str], actual: Sequence[int], predicted: Sequence[int]
    ) -> "ConfusionMatrix":
        k = len(labels)
        counts = np.zeros((k, k), dtype=np.int64)
        rows = np.asarray(actual, dtype=np.int64)
        cols = np.asarray(predicted, dtype=np.int64)
        np.add.at(counts, (rows, cols), 1)
        return cls(tuple(labels), counts)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.labels != other.labels:
            raise ValueError(f"cannot add confusion matrices over {self.labels} and {other.labels}")
        return ConfusionMatrix(self.labels, self.counts + other.counts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.counts, other.counts)

    def __hash__(self) -> int:
        return hash((self.labels, self.counts.tobytes()))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    @property
    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def predicted(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def accuracy_fraction(self) -> Fraction:
        """Exact accuracy.

        Fraction normalizes, so use ``correct``/``total`` for the display form.
        """
        if self.total == 0:
            raise EmptyMatrix()
        return Fraction(self.correct, self.total)

    def to_lists(self) -> List[List[int]]:
        return self.counts.tolist()

    def to_dict(self) -> Dict[str, object]:
        return {"labels": list(self.labels), "counts": self.to_lists()}


@dataclass(frozen=True)
class MetricsReport:
    """Weighted averages; ``None`` marks an undefined value."""

    accuracy: float
    tp_rate: float
    fp_rate: float
    precision: Optional[float]
    recall: float
    f1: Optional[float]

    def to_dict(self) -> Dict[str, Union[float, str]]:
        return {
            "accuracy": format_metric(self.accuracy),
            "tp_rate": format_metric(self.tp_rate),
            "fp_rate": format_metric(self.fp_rate),
            "precision": format_metric(self.precision),
            "recall": format_metric(self.recall),
            "f1": format_metric(self.f1),
        }


def format_metric(value: Optional[float]) -> Union[float, str]:
    """JSON form of a metric: the number, or "NAN" when undefined."""
    return NAN if value is None else float(value)


def format_percent(value: Optional[float], digits: int = 1) -> str:
    return NAN if value is None else f"{100.0 * value:.{digits}f}"


def weighted_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Support-weighted one-vs-rest metrics of ``cm``.

    Raises:
        EmptyMatrix: ``cm`` holds no counts.
    """
    n = cm.total
    if n == 0:
        raise EmptyMatrix()
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)
    fp = predicted - tp
    weights = support / n
    present = support > 0

    tpr = np.divide(tp, support, out=np.zeros_like(tp), where=present)
    negatives = n - support
    fpr = np.divide(fp, negatives, out=np.zeros_like(fp), where=negatives > 0)

    precision: Optional[float] = None
    f1: Optional[float] = None
    if not (present & (predicted == 0)).any():
        prec = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
        denom = prec + tpr
        f1_c = np.divide(2.0 * prec * tpr, denom, out=np.zeros_like(denom), where=denom > 0)
        precision = float(np.dot(weights, prec))
        f1 = float(np.dot(weights, f1_c))

    recall = float(np.dot(weights, tpr))
    return MetricsReport(
        accuracy=cm.correct / n,
        tp_rate=recall,
        fp_rate=float(np.dot(weights, fpr)),
        precision=precision,
        recall=recall,
        f1=f1,
    )
