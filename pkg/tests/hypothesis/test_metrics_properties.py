"""
Property-based tests for weighted confusion-matrix metrics.

Every metric is recomputed per class in plain Python and compared; the
structural identities (weighted TPR equals accuracy, label permutation
changes nothing) are checked on arbitrary non-empty matrices.
"""

import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from headmotion.metrics import ConfusionMatrix, weighted_metrics


@st.composite
def matrices(draw, max_classes=5, max_count=20):
    k = draw(st.integers(min_value=2, max_value=max_classes))
    counts = draw(
        st.lists(
            st.lists(st.integers(min_value=0, max_value=max_count), min_size=k, max_size=k),
            min_size=k,
            max_size=k,
        )
    )
    assume(sum(map(sum, counts)) > 0)
    return ConfusionMatrix(tuple(f"c{i}" for i in range(k)), counts)


def oracle(counts):
    """Per-class one-vs-rest metrics averaged with support weights."""
    k = len(counts)
    n = sum(map(sum, counts))
    support = [sum(row) for row in counts]
    predicted = [sum(counts[r][c] for r in range(k)) for c in range(k)]
    out = {"tpr": 0.0, "fpr": 0.0, "precision": 0.0, "f1": 0.0, "defined": True}
    for c in range(k):
        w = support[c] / n
        tp = counts[c][c]
        fp = predicted[c] - tp
        tpr = tp / support[c] if support[c] else 0.0
        negatives = n - support[c]
        out["tpr"] += w * tpr
        out["fpr"] += w * (fp / negatives if negatives else 0.0)
        if support[c] and not predicted[c]:
            out["defined"] = False
            continue
        prec = tp / predicted[c] if predicted[c] else 0.0
        f1 = 2 * prec * tpr / (prec + tpr) if prec + tpr else 0.0
        out["precision"] += w * prec
        out["f1"] += w * f1
    return out


class TestWeightedMetrics:
    @given(matrices())
    def test_matches_oracle(self, cm):
        report = weighted_metrics(cm)
        expected = oracle(cm.to_lists())
        assert math.isclose(report.tp_rate, expected["tpr"], abs_tol=1e-9)
        assert math.isclose(report.fp_rate, expected["fpr"], abs_tol=1e-9)
        if expected["defined"]:
            assert math.isclose(report.precision, expected["precision"], abs_tol=1e-9)
            assert math.isclose(report.f1, expected["f1"], abs_tol=1e-9)
        else:
            assert report.precision is None
            assert report.f1 is None

    @given(matrices())
    def test_weighted_tpr_is_accuracy(self, cm):
        report = weighted_metrics(cm)
        assert math.isclose(report.tp_rate, cm.correct / cm.total, abs_tol=1e-12)
        assert report.recall == report.tp_rate
        assert report.accuracy == cm.correct / cm.total

    @given(matrices())
    def test_values_are_rates(self, cm):
        report = weighted_metrics(cm)
        for value in (report.accuracy, report.tp_rate, report.fp_rate, report.precision, report.f1):
            assert value is None or -1e-12 <= value <= 1 + 1e-12

    @given(matrices(), st.randoms(use_true_random=False))
    def test_label_permutation_changes_nothing(self, cm, rnd):
        order = list(range(len(cm.labels)))
        rnd.shuffle(order)
        permuted = ConfusionMatrix(
            tuple(cm.labels[i] for i in order), cm.counts[np.ix_(order, order)]
        )
        a, b = weighted_metrics(cm), weighted_metrics(permuted)
        for name in ("accuracy", "tp_rate", "fp_rate", "precision", "f1"):
            x, y = getattr(a, name), getattr(b, name)
            assert (x is None) == (y is None)
            if x is not None:
                assert math.isclose(x, y, abs_tol=1e-12)

    @given(matrices(), matrices())
    def test_addition_adds_counts(self, a, b):
        assume(a.labels == b.labels)
        total = a + b
        assert total.total == a.total + b.total
        assert total.correct == a.correct + b.correct
