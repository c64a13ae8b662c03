"""Tests for confusion matrices and weighted metrics (headmotion/metrics.py)."""

from fractions import Fraction

import numpy as np
import pytest

from headmotion.errors import EmptyMatrix
from headmotion.metrics import NAN, ConfusionMatrix, format_percent, weighted_metrics

BINARY = ("no", "yes")


class TestConfusionMatrix:
    def test_from_indices(self):
        cm = ConfusionMatrix.from_indices(BINARY, [0, 0, 1, 1, 1], [0, 1, 1, 1, 0])
        assert cm.to_lists() == [[1, 1], [1, 2]]
        assert cm.total == 5
        assert cm.correct == 3
        assert cm.support.tolist() == [2, 3]
        assert cm.predicted.tolist() == [2, 3]

    def test_addition_pools_folds(self):
        a = ConfusionMatrix(BINARY, [[1, 0], [0, 1]])
        b = ConfusionMatrix(BINARY, [[2, 1], [0, 3]])
        assert (a + b) == ConfusionMatrix(BINARY, [[3, 1], [0, 4]])

    def test_addition_requires_same_labels(self):
        with pytest.raises(ValueError):
            other = ConfusionMatrix(("a", "b"), [[1, 0], [0, 1]])
            ConfusionMatrix(BINARY, [[1, 0], [0, 1]]) + other

    def test_shape_and_sign(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(BINARY, [[1, 2, 3]])
        with pytest.raises(ValueError):
            ConfusionMatrix(BINARY, [[1, -1], [0, 0]])

    def test_counts_are_read_only(self):
        cm = ConfusionMatrix.zeros(BINARY)
        with pytest.raises(ValueError):
            cm.counts[0, 0] = 5

    def test_exact_accuracy(self):
        cm = ConfusionMatrix(BINARY, [[20, 1], [0, 19]])
        assert cm.accuracy_fraction() == Fraction(39, 40)

    def test_serialization(self):
        cm = ConfusionMatrix(BINARY, [[8, 2], [3, 7]])
        assert cm.to_dict() == {"labels": ["no", "yes"], "counts": [[8, 2], [3, 7]]}


class TestWeightedMetrics:
    def test_binary_example(self):
        m = weighted_metrics(ConfusionMatrix(BINARY, [[8, 2], [3, 7]]))
        assert m.accuracy == pytest.approx(0.75)
        assert m.tp_rate == pytest.approx(0.75)
        assert m.fp_rate == pytest.approx(0.25)
        assert m.precision == pytest.approx(0.752525, abs=1e-6)
        assert m.recall == pytest.approx(0.75)
        assert m.f1 == pytest.approx(0.749373, abs=1e-6)

    def test_constant_majority_model(self):
        # 22 "no", 18 "yes", every row predicted "no"
        m = weighted_metrics(ConfusionMatrix(BINARY, [[22, 0], [18, 0]]))
        assert m.accuracy == pytest.approx(0.55)
        assert m.tp_rate == pytest.approx(0.55)
        assert m.recall == pytest.approx(0.55)
        assert m.precision is None
        assert m.f1 is None
        d = m.to_dict()
        assert d["precision"] == NAN
        assert d["f1"] == NAN
        assert d["accuracy"] == pytest.approx(0.55)

    def test_perfect(self):
        m = weighted_metrics(ConfusionMatrix(BINARY, [[20, 0], [0, 20]]))
        assert (m.accuracy, m.tp_rate, m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0, 1.0, 1.0)
        assert m.fp_rate == 0.0

    def test_weighted_tp_rate_equals_accuracy(self):
        cm = ConfusionMatrix(("a", "b", "c"), [[5, 1, 0], [2, 7, 1], [0, 3, 9]])
        m = weighted_metrics(cm)
        assert m.tp_rate == pytest.approx(m.accuracy, abs=1e-12)

    def test_absent_class_does_not_undefine_precision(self):
        cm = ConfusionMatrix(("a", "b", "c"), [[5, 0, 0], [0, 5, 0], [0, 0, 0]])
        m = weighted_metrics(cm)
        assert m.precision == 1.0
        assert m.fp_rate == 0.0

    def test_three_class_by_hand(self):
        counts = np.array([[5, 1, 0], [2, 7, 1], [0, 3, 9]], dtype=float)
        n = counts.sum()
        tp = np.diag(counts)
        support = counts.sum(axis=1)
        predicted = counts.sum(axis=0)
        prec = tp / predicted
        rec = tp / support
        f1 = 2 * prec * rec / (prec + rec)
        fpr = (predicted - tp) / (n - support)
        w = support / n
        m = weighted_metrics(ConfusionMatrix(("a", "b", "c"), counts.astype(int)))
        assert m.precision == pytest.approx(np.dot(w, prec), abs=1e-12)
        assert m.f1 == pytest.approx(np.dot(w, f1), abs=1e-12)
        assert m.fp_rate == pytest.approx(np.dot(w, fpr), abs=1e-12)

    def test_empty(self):
        with pytest.raises(EmptyMatrix):
            weighted_metrics(ConfusionMatrix.zeros(BINARY))
        with pytest.raises(EmptyMatrix):
            ConfusionMatrix.zeros(BINARY).accuracy_fraction()


class TestFormatting:
    def test_percent(self):
        assert format_percent(0.925) == "92.5"
        assert format_percent(1.0) == "100.0"
        assert format_percent(None) == NAN
        assert format_percent(0.692307, digits=2) == "69.23"
