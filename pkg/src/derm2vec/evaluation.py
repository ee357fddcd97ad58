"""Stratified k-fold cross-validation and the mean CV score."""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import derive_seed, make_rng
from .errors import FoldError, LeakageError


@dataclass(frozen=True)
class FoldPlan:
    k: int
    folds: tuple
    seed: int
    stratified: bool = True

    @property
    def n_rows(self):
        return sum(f.size for f in self.folds)

    def test_indices(self, i):
        return self.folds[i]

    def train_indices(self, i):
        return np.sort(np.concatenate([f for j, f in enumerate(self.folds) if j != i]))


def make_folds(labels, k=10, seed=0, stratified=True):
    """Assign rows to ``k`` folds.

    Stratified plans shuffle each class separately and deal its rows round-robin,
    carrying the dealing position over from one class to the next so overall
    fold sizes also differ by at most one.
    """
    labels = np.asarray(labels)
    n = labels.size
    if k < 2:
        raise ValueError("need at least 2 folds")
    if k > n:
        raise ValueError(f"cannot make {k} folds from {n} rows")
    rng = make_rng(seed)
    assign = np.empty(n, dtype=np.int64)
    if stratified:
        pos = 0
        for c in np.unique(labels):
            members = rng.permutation(np.flatnonzero(labels == c))
            assign[members] = (pos + np.arange(members.size)) % k
            pos += members.size
    else:
        assign[rng.permutation(n)] = np.arange(n) % k
    folds = tuple(np.flatnonzero(assign == i) for i in range(k))
    return FoldPlan(k, folds, int(seed), stratified)


@dataclass
class CVReport:
    fold_accuracies: tuple
    mean_cv_score: float
    fingerprint: str
    seed: int
    wall_time: float
    description: dict = field(default_factory=dict)
    fold_sizes: tuple = ()
    confusion: np.ndarray = None
    guard_checks: int = 0

    def csv_rows(self):
        """One record per fold for ``cv_reports.csv``."""
        return [
            {
                "fingerprint": self.fingerprint,
                "seed": self.seed,
                "fold": i,
                "fold_size": self.fold_sizes[i] if self.fold_sizes else "",
                "accuracy": repr(float(a)),
                "mean_cv_score": repr(float(self.mean_cv_score)),
            }
            for i, a in enumerate(self.fold_accuracies)
        ]

    def summary_row(self):
        row = {"fingerprint": self.fingerprint, "seed": self.seed}
        row.update({f"fold{i}": repr(float(a)) for i, a in enumerate(self.fold_accuracies)})
        row["mean_cv_score"] = repr(float(self.mean_cv_score))
        return row


def mean_cv_score(fold_accuracies):
    return 100.0 * float(np.mean(np.asarray(fold_accuracies, dtype=np.float64)))


def fingerprint(description):
    blob = json.dumps(description, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _guard(train_idx, test_idx, fold):
    if np.intersect1d(train_idx, test_idx).size:
        raise LeakageError(f"fold {fold}: validation rows would reach the fit call")


def _run_fold(method, x, y, train_idx, test_idx, fold, seed):
    _guard(train_idx, test_idx, fold)
    try:
        predictor = method.fit(x[train_idx], y[train_idx], seed)
        pred = np.asarray(predictor(x[test_idx]), dtype=np.int64)
    except Exception as e:
        raise FoldError(fold, e) from e
    return fold, pred


def cross_validate(method, x, y, plan, seed=0, jobs=1, n_classes=None, description=None):
    """Fit ``method`` on k-1 folds, score it on the held-out fold, k times.

    ``method.fit(x_train, y_train, seed)`` must return a callable mapping
    feature rows to labels. Fold ``i`` trains with seed
    ``derive_seed(seed, "fold", i)``, so results do not depend on ``jobs``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if plan.n_rows != x.shape[0]:
        raise ValueError(f"fold plan covers {plan.n_rows} rows, data has {x.shape[0]}")
    n_classes = n_classes or int(y.max()) + 1
    description = description if description is not None else _describe(method)
    start = time.perf_counter()

    tasks = []
    checks = 0
    for i in range(plan.k):
        train_idx, test_idx = plan.train_indices(i), plan.test_indices(i)
        _guard(train_idx, test_idx, i)
        checks += 1
        tasks.append((train_idx, test_idx, i, derive_seed(seed, "fold", i)))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_fold, method, x, y, *t) for t in tasks]
            results = dict(f.result() for f in futures)
    else:
        results = dict(_run_fold(method, x, y, *t) for t in tasks)

    accs, sizes = [], []
    confusion = np.zeros((plan.k, n_classes, n_classes), dtype=np.int64)
    for i in range(plan.k):
        test_idx = plan.test_indices(i)
        pred = results[i]
        accs.append(float(np.mean(pred == y[test_idx])))
        sizes.append(int(test_idx.size))
        np.add.at(confusion[i], (y[test_idx], pred), 1)

    return CVReport(
        fold_accuracies=tuple(accs),
        mean_cv_score=mean_cv_score(accs),
        fingerprint=fingerprint(description),
        seed=int(seed),
        wall_time=time.perf_counter() - start,
        description=description,
        fold_sizes=tuple(sizes),
        confusion=confusion,
        guard_checks=checks,
    )


def _describe(method):
    describe = getattr(method, "describe", None)
    return describe() if describe else {"method": repr(method)}
