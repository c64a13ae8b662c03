"""
Native classifier pool.

Each ClassifierSpec is a frozen, hashable description of one classifier and
its hyperparameters; ``spec.build()`` returns a fresh estimator. Estimators
work on numpy arrays: ``fit(X, y, n_classes)`` takes class indices in
``range(n_classes)`` and ``predict(X)`` returns class indices. Label names
are handled one level up, in ``learn``.

Every estimator is a deterministic function of its training data (the
random forest draws from ``default_rng(spec.seed)``). Ties always resolve to
the lowest class index, or the earliest feature/threshold.
"""

import math
from dataclasses import dataclass, fields
from typing import ClassVar, Dict, List, Optional, Tuple, Type

import numpy as np

from .errors import InvalidHyperparameters


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------
class ClassifierSpec:
    """Base of the six spec dataclasses."""

    kind: ClassVar[str] = ""
    aliases: ClassVar[Tuple[str, ...]] = ()

    def validate(self) -> None:
        raise NotImplementedError

    def build(self) -> "Estimator":
        raise NotImplementedError

    def describe(self) -> str:
        """``Kind(param=value, ...)``, stable across runs (used in reports)."""
        params = ", ".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return f"{self.kind}({params})"

    @property
    def standardizes(self) -> bool:
        """Whether fit z-scores the features first."""
        return False


def _positive_int(spec, name: str) -> None:
    value = getattr(spec, name)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InvalidHyperparameters(f"{spec.kind}.{name} must be an integer >= 1, got {value!r}")


@dataclass(frozen=True)
class OneR(ClassifierSpec):
    bins: int = 6

    kind: ClassVar[str] = "OneR"
    aliases: ClassVar[Tuple[str, ...]] = ("oner",)

    def validate(self) -> None:
        _positive_int(self, "bins")

    def build(self) -> "Estimator":
        self.validate()
        return OneRClassifier(self.bins)


@dataclass(frozen=True)
class KNN(ClassifierSpec):
    k: int = 3

    kind: ClassVar[str] = "KNN"
    aliases: ClassVar[Tuple[str, ...]] = ("knn", "ibk")

    def validate(self) -> None:
        _positive_int(self, "k")

    def build(self) -> "Estimator":
        self.validate()
        return KNNClassifier(self.k)

    @property
    def standardizes(self) -> bool:
        return True


@dataclass(frozen=True)
class DecisionTree(ClassifierSpec):
    max_depth: int = 4
    min_leaf: int = 2

    kind: ClassVar[str] = "DecisionTree"
    aliases: ClassVar[Tuple[str, ...]] = ("decisiontree", "tree", "cart")

    def validate(self) -> None:
        _positive_int(self, "max_depth")
        _positive_int(self, "min_leaf")

    def build(self) -> "Estimator":
        self.validate()
        return TreeClassifier(self.max_depth, self.min_leaf)


@dataclass(frozen=True)
class RandomForest(ClassifierSpec):
    n_trees: int = 25
    max_depth: int = 4
    feature_subsample: int = 2
    seed: int = 0

    kind: ClassVar[str] = "RandomForest"
    aliases: ClassVar[Tuple[str, ...]] = ("randomforest", "forest", "rf")

    def validate(self) -> None:
        _positive_int(self, "n_trees")
        _positive_int(self, "max_depth")
        _positive_int(self, "feature_subsample")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise InvalidHyperparameters(
                f"RandomForest.seed must be an integer >= 0, got {self.seed!r}"
            )

    def build(self) -> "Estimator":
        self.validate()
        return ForestClassifier(self.n_trees, self.max_depth, self.feature_subsample, self.seed)


@dataclass(frozen=True)
class Logistic(ClassifierSpec):
    epochs: int = 300
    learning_rate: float = 0.1
    l2: float = 1e-3

    kind: ClassVar[str] = "Logistic"
    aliases: ClassVar[Tuple[str, ...]] = ("logistic", "logreg")

    def validate(self) -> None:
        _positive_int(self, "epochs")
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise InvalidHyperparameters(
                f"Logistic.learning_rate must be > 0, got {self.learning_rate!r}"
            )
        if not (math.isfinite(self.l2) and self.l2 >= 0):
            raise InvalidHyperparameters(f"Logistic.l2 must be >= 0, got {self.l2!r}")

    def build(self) -> "Estimator":
        self.validate()
        return LogisticClassifier(self.epochs, float(self.learning_rate), float(self.l2))

    @property
    def standardizes(self) -> bool:
        return True


@dataclass(frozen=True)
class AdaBoostStumps(ClassifierSpec):
    rounds: int = 20

    kind: ClassVar[str] = "AdaBoostStumps"
    aliases: ClassVar[Tuple[str, ...]] = ("adabooststumps", "adaboost", "ada")

    def validate(self) -> None:
        _positive_int(self, "rounds")

    def build(self) -> "Estimator":
        self.validate()
        return AdaBoostClassifier(self.rounds)


SPEC_TYPES: Tuple[Type[ClassifierSpec], ...] = (
    OneR,
    KNN,
    DecisionTree,
    RandomForest,
    Logistic,
    AdaBoostStumps,
)

SPEC_BY_ALIAS: Dict[str, Type[ClassifierSpec]] = {
    alias: cls for cls in SPEC_TYPES for alias in (cls.kind.lower(),) + cls.aliases
}


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------
class Estimator:
    n_classes: int

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int) -> "Estimator":
        raise NotImplementedError

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _majority(counts: np.ndarray) -> int:
    # np.argmax returns the first maximum: lowest class index wins ties
    return int(np.argmax(counts))


class Standardizer:
    """Per-feature z-score fitted on training rows; constant columns pass through centred."""

    def fit(self, X: np.ndarray) -> "Standardizer":
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.scale_ = np.where(std > 0, std, 1.0)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean_) / self.scale_


class OneRClassifier(Estimator):
    """One-rule: a single feature cut into at most ``bins`` intervals.

    Per feature, rows sorted by value start as one interval per distinct
    value; adjacent intervals are then merged, cheapest first (fewest extra
    training errors, leftmost on ties), until at most ``bins`` remain, and
    finally neighbours predicting the same class are fused. The feature with
    the fewest training errors wins.
    """

    def __init__(self, bins: int):
        self.bins = bins

    @staticmethod
    def _errors(counts: np.ndarray) -> int:
        return int(counts.sum() - counts.max())

    def _intervals(self, x: np.ndarray, y: np.ndarray) -> Tuple[List[float], List[np.ndarray]]:
        order = np.argsort(x, kind="stable")
        xs, ys = x[order], y[order]
        values, starts = np.unique(xs, return_index=True)
        bounds = list(starts) + [len(xs)]
        counts = [
            np.bincount(ys[bounds[i] : bounds[i + 1]], minlength=self.n_classes)
            for i in range(len(values))
        ]
        lows = list(values)  # first value of each interval
        highs = list(values)  # last value of each interval

        def merge(i: int) -> None:
            counts[i] = counts[i] + counts.pop(i + 1)
            highs[i] = highs.pop(i + 1)
            lows.pop(i + 1)

        while len(counts) > self.bins:
            costs = [
                self._errors(counts[i] + counts[i + 1])
                - self._errors(counts[i])
                - self._errors(counts[i + 1])
                for i in range(len(counts) - 1)
            ]
            merge(int(np.argmin(costs)))
        i = 0
        while i < len(counts) - 1:
            if _majority(counts[i]) == _majority(counts[i + 1]):
                merge(i)
            else:
                i += 1
        thresholds = [(highs[i] + lows[i + 1]) / 2.0 for i in range(len(counts) - 1)]
        return thresholds, counts

    def fit(self, X, y, n_classes):
        self.n_classes = n_classes
        best = None
        for j in range(X.shape[1]):
            thresholds, counts = self._intervals(X[:, j], y)
            errors = sum(self._errors(c) for c in counts)
            if best is None or errors < best[0]:
                best = (errors, j, thresholds, counts)
        _, self.feature_, thresholds, counts = best
        self.thresholds_ = np.asarray(thresholds, dtype=np.float64)
        self.classes_ = np.array([_majority(c) for c in counts], dtype=np.int64)
        return self

    def predict(self, X):
        bins = np.searchsorted(self.thresholds_, X[:, self.feature_], side="right")
        return self.classes_[bins]


class KNNClassifier(Estimator):
    """k nearest neighbours, Euclidean distance on z-scored features.

    Neighbours at equal distance keep training order. A vote tie goes to
    the tied class holding the nearest neighbour.
    """

    def __init__(self, k: int):
        self.k = k

    def fit(self, X, y, n_classes):
        self.n_classes = n_classes
        self.scaler_ = Standardizer().fit(X)
        self.X_ = self.scaler_.transform(X)
        self.y_ = np.asarray(y, dtype=np.int64)
        return self

    def predict(self, X):
        Z = self.scaler_.transform(X)
        k = min(self.k, len(self.y_))
        dist = ((Z[:, np.newaxis, :] - self.X_[np.newaxis, :, :]) ** 2).sum(axis=2)
        out = np.empty(len(Z), dtype=np.int64)
        for row, d in enumerate(dist):
            nearest = self.y_[np.argsort(d, kind="stable")[:k]]
            votes = np.bincount(nearest, minlength=self.n_classes)
            tied = np.flatnonzero(votes == votes.max())
            out[row] = next(label for label in nearest if label in tied)
        return out


@dataclass
class _Node:
    prediction: int
    feature: int = -1
    threshold: float = 0.0
    left: Optional["_Node"] = None
    right: Optional["_Node"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _best_split(
    x: np.ndarray, onehot: np.ndarray, min_leaf: int
) -> Optional[Tuple[float, float]]:
    """(weighted gini, threshold) of the best cut on one feature, or None.

    ``onehot`` may carry sample weights instead of 0/1 entries.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    left = np.cumsum(onehot[order], axis=0)[:-1]
    right = onehot.sum(axis=0) - left
    n_left = np.arange(1, len(xs))
    n_right = len(xs) - n_left
    valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    w_left = left.sum(axis=1)
    w_right = right.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        gini_left = w_left - (left**2).sum(axis=1) / w_left
        gini_right = w_right - (right**2).sum(axis=1) / w_right
    impurity = np.where(valid, np.nan_to_num(gini_left) + np.nan_to_num(gini_right), np.inf)
    i = int(np.argmin(impurity))
    return float(impurity[i]), float((xs[i] + xs[i + 1]) / 2.0)


class TreeClassifier(Estimator):
    """CART with the gini criterion and midpoint thresholds (``x <= t`` goes left)."""

    def __init__(self, max_depth: int, min_leaf: int, feature_subsample: Optional[int] = None):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.feature_subsample = feature_subsample

    def fit(self, X, y, n_classes, rng: Optional[np.random.Generator] = None):
        self.n_classes = n_classes
        self._rng = rng
        onehot = np.eye(n_classes)[np.asarray(y, dtype=np.int64)]
        self.root_ = self._grow(np.asarray(X, dtype=np.float64), onehot, 0)
        del self._rng
        return self

    def _candidate_features(self, d: int) -> np.ndarray:
        if self.feature_subsample is None or self.feature_subsample >= d:
            return np.arange(d)
        return np.sort(self._rng.choice(d, self.feature_subsample, replace=False))

    def _grow(self, X: np.ndarray, onehot: np.ndarray, depth: int) -> _Node:
        counts = onehot.sum(axis=0)
        node = _Node(_majority(counts))
        n = len(X)
        if depth >= self.max_depth or np.count_nonzero(counts) <= 1 or n < 2 * self.min_leaf:
            return node
        parent = n - float((counts**2).sum()) / n
        best = None
        for j in self._candidate_features(X.shape[1]):
            found = _best_split(X[:, j], onehot, self.min_leaf)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], int(j), found[1])
        if best is None or best[0] >= parent - 1e-12:
            return node
        _, node.feature, node.threshold = best
        mask = X[:, node.feature] <= node.threshold
        node.left = self._grow(X[mask], onehot[mask], depth + 1)
        node.right = self._grow(X[~mask], onehot[~mask], depth + 1)
        return node

    def _predict_one(self, row: np.ndarray) -> int:
        node = self.root_
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node.prediction

    def predict(self, X):
        return np.array([self._predict_one(row) for row in X], dtype=np.int64)


class ForestClassifier(Estimator):
    """Bagged CART trees with per-split feature subsampling; majority vote."""

    def __init__(self, n_trees: int, max_depth: int, feature_subsample: int, seed: int):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.feature_subsample = feature_subsample
        self.seed = seed

    def fit(self, X, y, n_classes):
        self.n_classes = n_classes
        rng = np.random.default_rng(self.seed)
        n = len(X)
        self.trees_ = []
        for _ in range(self.n_trees):
            idx = rng.integers(0, n, size=n)
            tree = TreeClassifier(self.max_depth, 1, self.feature_subsample)
            self.trees_.append(tree.fit(X[idx], y[idx], n_classes, rng=rng))
        return self

    def predict(self, X):
        votes = np.zeros((len(X), self.n_classes), dtype=np.int64)
        rows = np.arange(len(X))
        for tree in self.trees_:
            votes[rows, tree.predict(X)] += 1
        return np.argmax(votes, axis=1)


class LogisticClassifier(Estimator):
    """Multinomial logistic regression, full-batch gradient descent from zero weights."""

    def __init__(self, epochs: int, learning_rate: float, l2: float):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.l2 = l2

    @staticmethod
    def _design(Z: np.ndarray) -> np.ndarray:
        return np.hstack([Z, np.ones((len(Z), 1))])

    def fit(self, X, y, n_classes):
        self.n_classes = n_classes
        self.scaler_ = Standardizer().fit(X)
        A = self._design(self.scaler_.transform(X))
        Y = np.eye(n_classes)[np.asarray(y, dtype=np.int64)]
        W = np.zeros((A.shape[1], n_classes))
        penalty = np.ones_like(W)
        penalty[-1, :] = 0.0  # bias row is not regularized
        n = len(A)
        for _ in range(self.epochs):
            logits = A @ W
            logits -= logits.max(axis=1, keepdims=True)
            P = np.exp(logits)
            P /= P.sum(axis=1, keepdims=True)
            grad = A.T @ (P - Y) / n + self.l2 * penalty * W
            W -= self.learning_rate * grad
        self.W_ = W
        return self

    def predict(self, X):
        return np.argmax(self._design(self.scaler_.transform(X)) @ self.W_, axis=1)


class _Stump:
    __slots__ = ("feature", "threshold", "left", "right", "alpha")

    def __init__(self, feature: int, threshold: float, left: int, right: int):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.alpha = 0.0

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.where(X[:, self.feature] <= self.threshold, self.left, self.right)


class AdaBoostClassifier(Estimator):
    """Multiclass AdaBoost over one-split stumps (SAMME weighting).

    Each stump predicts the heaviest class on either side of its cut. For
    two classes the weights reduce to AdaBoost.M1. Boosting stops early when
    a stump is perfect (it is kept with a large weight) or no better than
    chance (it is discarded).
    """

    PERFECT_ALPHA = 10.0

    def __init__(self, rounds: int):
        self.rounds = rounds

    def _fit_stump(self, X: np.ndarray, onehot: np.ndarray, w: np.ndarray) -> _Stump:
        weighted = onehot * w[:, np.newaxis]
        best: Optional[Tuple[float, _Stump]] = None
        for j in range(X.shape[1]):
            order = np.argsort(X[:, j], kind="stable")
            xs = X[order, j]
            left = np.cumsum(weighted[order], axis=0)[:-1]
            right = weighted.sum(axis=0) - left
            cuts = np.flatnonzero(xs[:-1] < xs[1:])
            if not len(cuts):
                continue
            correct = left[cuts].max(axis=1) + right[cuts].max(axis=1)
            i = int(np.argmax(correct))
            err = float(w.sum() - correct[i])
            if best is None or err < best[0]:
                c = cuts[i]
                stump = _Stump(
                    j,
                    float((xs[c] + xs[c + 1]) / 2.0),
                    _majority(left[c]),
                    _majority(right[c]),
                )
                best = (err, stump)
        if best is None:
            # every feature constant: a stump that predicts the weighted majority
            cls = _majority(weighted.sum(axis=0))
            return _Stump(0, math.inf, cls, cls)
        return best[1]

    def fit(self, X, y, n_classes):
        self.n_classes = n_classes
        y = np.asarray(y, dtype=np.int64)
        onehot = np.eye(n_classes)[y]
        n = len(X)
        w = np.full(n, 1.0 / n)
        self.fallback_ = _majority(onehot.sum(axis=0))
        self.stumps_: List[_Stump] = []
        chance = 1.0 - 1.0 / n_classes
        log_k = math.log(n_classes - 1) if n_classes > 1 else 0.0
        for _ in range(self.rounds):
            stump = self._fit_stump(X, onehot, w)
            miss = stump.predict(X) != y
            err = float(w[miss].sum() / w.sum())
            if err <= 0.0:
                stump.alpha = self.PERFECT_ALPHA + log_k
                self.stumps_.append(stump)
                break
            if err >= chance:
                break
            stump.alpha = math.log((1.0 - err) / err) + log_k
            self.stumps_.append(stump)
            w = w * np.exp(stump.alpha * miss)
            w /= w.sum()
        return self

    def predict(self, X):
        if not self.stumps_:
            return np.full(len(X), self.fallback_, dtype=np.int64)
        scores = np.zeros((len(X), self.n_classes))
        rows = np.arange(len(X))
        for stump in self.stumps_:
            scores[rows, stump.predict(X)] += stump.alpha
        return np.argmax(scores, axis=1)
