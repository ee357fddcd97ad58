"""Classical comparison methods: kNN, Gaussian naive Bayes, CART, random forest
and the two-unit shallow ANN.

Ties are always resolved toward the lowest index (training row, feature,
threshold or class), so every method is deterministic given its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import derive_seed, make_rng
from .neural import TrainConfig
from .pipeline import DnnMethod


def _labels(y):
    y = np.asarray(y)
    if y.size and (y.min() < 0 or not np.all(y == np.round(y))):
        raise ValueError("labels must be non-negative integers")
    return y.astype(np.int64)


def _n_classes(y, n_classes):
    return int(n_classes) if n_classes is not None else int(y.max()) + 1


# ---------------------------------------------------------------- k nearest neighbours


@dataclass(frozen=True)
class KnnModel:
    x: np.ndarray
    y: np.ndarray
    k: int = 5
    n_classes: int = 0

    def predict(self, test):
        test = np.ascontiguousarray(test, dtype=np.float64)
        if test.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        if test.shape[1] != self.x.shape[1]:
            raise ValueError(f"test has {test.shape[1]} features, model has {self.x.shape[1]}")
        return kernels.knn_predict(self.x, self.y, test, self.k, self.n_classes)


def knn_fit(x, y, k=5, n_classes=None):
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = _labels(y)
    if x.shape[0] == 0:
        raise ValueError("kNN needs at least one training row")
    if not 1 <= k <= x.shape[0]:
        raise ValueError(f"k={k} must lie in 1..{x.shape[0]}")
    return KnnModel(x, y, k, _n_classes(y, n_classes))


def knn_fit_predict(train_x, train_y, test_x, k=5):
    """Majority vote among the ``k`` nearest training rows (Euclidean)."""
    return knn_fit(train_x, train_y, k).predict(test_x)


# ---------------------------------------------------------------- Gaussian naive Bayes


@dataclass(frozen=True)
class GaussianNbModel:
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def joint_log_likelihood(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.empty((x.shape[0], self.priors.size))
        for c in range(self.priors.size):
            var = self.variances[c]
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * var))
            ll -= 0.5 * np.sum((x - self.means[c]) ** 2 / var, axis=1)
            out[:, c] = np.log(self.priors[c]) + ll
        return out


def gnb_fit(x, y, n_classes=None, var_smoothing=1e-9):
    """Per-class priors, means and variances.

    Every variance is padded by ``var_smoothing`` times the largest feature
    variance so constant features (common in one-hot blocks) stay finite.
    """
    x = np.asarray(x, dtype=np.float64)
    y = _labels(y)
    if x.shape[0] == 0:
        raise ValueError("naive Bayes needs at least one training row")
    n_classes = _n_classes(y, n_classes)
    counts = np.bincount(y, minlength=n_classes)
    if (counts == 0).any():
        missing = np.flatnonzero(counts == 0).tolist()
        raise ValueError(f"classes {missing} have no training samples")
    floor = var_smoothing * max(float(np.var(x, axis=0).max()), 0.0)
    if floor == 0.0:
        floor = var_smoothing
    means = np.stack([x[y == c].mean(axis=0) for c in range(n_classes)])
    variances = np.stack([x[y == c].var(axis=0) for c in range(n_classes)]) + floor
    return GaussianNbModel(counts / counts.sum(), means, variances)


def gnb_predict_proba(model, x):
    jll = model.joint_log_likelihood(x)
    jll -= jll.max(axis=1, keepdims=True)
    p = np.exp(jll)
    return p / p.sum(axis=1, keepdims=True)


def gnb_predict(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.argmax(model.joint_log_likelihood(x), axis=1).astype(np.int64)


# ---------------------------------------------------------------- CART


@dataclass(frozen=True)
class TreeModel:
    """Flat-array binary tree. ``feature[i] == -1`` marks a leaf; ``counts[i]``
    holds the training class counts that reached node ``i``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray
    depth: np.ndarray
    max_depth: object = None

    @property
    def n_nodes(self):
        return self.feature.size

    def leaves(self):
        return np.flatnonzero(self.feature < 0)

    def predict(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        nodes = kernels.tree_apply(x, self.feature, self.threshold, self.left, self.right)
        return np.argmax(self.counts[nodes], axis=1).astype(np.int64)


def tree_fit(x, y, max_depth=None, min_leaf=1, n_classes=None, max_features=None, rng=None):
    """Greedy CART with Gini impurity.

    Candidate thresholds are midpoints between consecutive distinct values. A
    node becomes a leaf when it is pure, sits at ``max_depth``, holds fewer
    than ``2 * min_leaf`` rows, or no split lowers impurity. With
    ``max_features`` set, each node draws that many features at random from
    ``rng`` (the random-forest variant).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = _labels(y)
    if x.shape[0] == 0:
        raise ValueError("cannot grow a tree on zero rows")
    if min_leaf < 1:
        raise ValueError("min_leaf must be at least 1")
    n_classes = _n_classes(y, n_classes)
    d = x.shape[1]
    if max_features is not None and rng is None:
        raise ValueError("feature subsampling needs an rng")
    all_features = np.arange(d, dtype=np.int64)

    feature, threshold, left, right, counts, depth = [], [], [], [], [], []

    def new_node(rows, level):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(np.bincount(y[rows], minlength=n_classes))
        depth.append(level)
        return len(feature) - 1

    root_rows = np.arange(x.shape[0])
    stack = [(new_node(root_rows, 0), root_rows, 0)]
    while stack:
        node, rows, level = stack.pop()
        if max_depth is not None and level >= max_depth:
            continue
        if rows.size < 2 * min_leaf or np.count_nonzero(counts[node]) <= 1:
            continue
        if max_features is None or max_features >= d:
            feats = all_features
        else:
            feats = np.sort(rng.choice(d, size=max_features, replace=False)).astype(np.int64)
        f, t = kernels.best_split(x[rows], y[rows], n_classes, feats, min_leaf)
        if f < 0:
            continue
        go_left = x[rows, f] <= t
        lrows, rrows = rows[go_left], rows[~go_left]
        feature[node] = int(f)
        threshold[node] = float(t)
        li = new_node(lrows, level + 1)
        ri = new_node(rrows, level + 1)
        left[node], right[node] = li, ri
        # right pushed first so the left subtree is numbered first
        stack.append((ri, rrows, level + 1))
        stack.append((li, lrows, level + 1))

    return TreeModel(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64),
        depth=np.array(depth, dtype=np.int64),
        max_depth=max_depth,
    )


def tree_predict(model, x):
    return model.predict(x)


# ---------------------------------------------------------------- random forest


@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    samples: tuple
    seed: int
    n_estimators: int
    max_depth: object
    max_features: object
    n_classes: int

    def predict(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        votes = np.zeros((x.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(x.shape[0])
        for tree in self.trees:
            votes[rows, tree.predict(x)] += 1
        return np.argmax(votes, axis=1).astype(np.int64)


def _resolve_max_features(max_features, d):
    if max_features == "sqrt":
        return max(1, int(np.sqrt(d)))
    if max_features is None:
        return None
    return int(max_features)


def forest_fit(x, y, n_estimators=100, max_depth=3, seed=0, max_features="sqrt",
               bootstrap=True, min_leaf=1, n_classes=None):
    """Bagged CART trees with per-split feature subsampling."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = _labels(y)
    if x.shape[0] == 0:
        raise ValueError("cannot grow a forest on zero rows")
    n_classes = _n_classes(y, n_classes)
    mf = _resolve_max_features(max_features, x.shape[1])
    n = x.shape[0]
    trees, samples = [], []
    for t in range(n_estimators):
        rng = make_rng(derive_seed(seed, "tree", t))
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(tree_fit(x[idx], y[idx], max_depth, min_leaf, n_classes, mf, rng))
        samples.append(idx)
    return ForestModel(tuple(trees), tuple(samples), int(seed), n_estimators, max_depth, mf, n_classes)


def forest_predict(model, x):
    return model.predict(x)


def forest_oob_accuracy(model, x, y):
    """Accuracy of out-of-bag votes over rows left out by at least one tree."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = _labels(y)
    votes = np.zeros((x.shape[0], model.n_classes), dtype=np.int64)
    rows = np.arange(x.shape[0])
    for tree, idx in zip(model.trees, model.samples):
        oob = np.ones(x.shape[0], dtype=bool)
        oob[idx] = False
        if oob.any():
            votes[rows[oob], tree.predict(x[oob])] += 1
    seen = votes.sum(axis=1) > 0
    if not seen.any():
        return float("nan")
    return float(np.mean(np.argmax(votes[seen], axis=1) == y[seen]))


# ---------------------------------------------------------------- CV adapters


@dataclass(frozen=True)
class KnnMethod:
    k: int = 5

    def fit(self, x, y, seed):
        return knn_fit(x, y, self.k).predict

    def describe(self):
        return {"method": "knn", "k": self.k}


@dataclass(frozen=True)
class GnbMethod:
    var_smoothing: float = 1e-9

    def fit(self, x, y, seed):
        model = gnb_fit(x, y, var_smoothing=self.var_smoothing)
        return lambda xt: gnb_predict(model, xt)

    def describe(self):
        return {"method": "gaussian_nb", "var_smoothing": self.var_smoothing}


@dataclass(frozen=True)
class TreeMethod:
    max_depth: object = None
    min_leaf: int = 1

    def fit(self, x, y, seed):
        return tree_fit(x, y, self.max_depth, self.min_leaf).predict

    def describe(self):
        return {"method": "decision_tree", "max_depth": self.max_depth, "min_leaf": self.min_leaf}


@dataclass(frozen=True)
class ForestMethod:
    n_estimators: int = 100
    max_depth: object = 3
    max_features: object = "sqrt"

    def fit(self, x, y, seed):
        return forest_fit(x, y, self.n_estimators, self.max_depth, seed, self.max_features).predict

    def describe(self):
        return {"method": "random_forest", "n_estimators": self.n_estimators,
                "max_depth": self.max_depth, "max_features": self.max_features}


def shallow_ann_method(train=None):
    """129 -> 2 (relu) -> 6 (softmax), no dropout."""
    return DnnMethod(hidden=(2,), dropout=0.0, train=train or TrainConfig())


@dataclass(frozen=True)
class ShallowAnnMethod:
    train: TrainConfig = field(default_factory=TrainConfig)

    def fit(self, x, y, seed):
        return shallow_ann_method(self.train).fit(x, y, seed)

    def describe(self):
        return {"method": "shallow_ann", "hidden": [2], "train": vars(self.train) | {"seed": None}}


def shallow_ann(train_x, train_y, test_x, seed=0, train=None):
    return shallow_ann_method(train).fit(train_x, train_y, seed)(test_x)
