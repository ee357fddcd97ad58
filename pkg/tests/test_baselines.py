import numpy as np
import pytest

from _oracles import knn_oracle, split_oracle
from derm2vec.baselines import (ForestMethod, GnbMethod, KnnMethod, ShallowAnnMethod, TreeMethod,
                                forest_fit, forest_oob_accuracy, forest_predict, gnb_fit,
                                gnb_predict, gnb_predict_proba, knn_fit, knn_fit_predict, tree_fit,
                                tree_predict)
from derm2vec.core import make_rng


def test_knn_k1_on_training_data_is_perfect(raw_matrix):
    x, y = raw_matrix.x, raw_matrix.labels
    # duplicated rows with different labels would break this, so dedupe first
    _, first = np.unique(x, axis=0, return_index=True)
    x, y = x[first], y[first]
    assert np.array_equal(knn_fit_predict(x, y, x, k=1), y)


def test_knn_distance_tie_goes_to_lower_index():
    tx = np.array([[1.0], [-1.0]])
    assert knn_fit_predict(tx, np.array([1, 0]), np.array([[0.0]]), k=1)[0] == 1


def test_knn_vote_tie_goes_to_lower_class():
    tx = np.array([[1.0], [2.0]])
    assert knn_fit_predict(tx, np.array([4, 2]), np.array([[0.0]]), k=2)[0] == 2


def test_knn_rejects_bad_k():
    with pytest.raises(ValueError):
        knn_fit(np.zeros((3, 2)), np.zeros(3, dtype=int), k=4)
    with pytest.raises(ValueError):
        knn_fit(np.zeros((3, 2)), np.zeros(3, dtype=int), k=0)


def test_knn_matches_oracle_on_real_rows(raw_matrix):
    x, y = raw_matrix.x, raw_matrix.labels
    pred = knn_fit(x[:300], y[:300], k=5).predict(x[300:])
    assert np.array_equal(pred, knn_oracle(x[:300], y[:300], x[300:], 5, 6))


def test_gnb_hand_computed_example():
    x = np.array([[0.0], [2.0], [10.0], [12.0]])
    y = np.array([0, 0, 1, 1])
    m = gnb_fit(x, y)
    np.testing.assert_allclose(m.means.ravel(), [1.0, 11.0])
    assert gnb_predict(m, np.array([[1.5], [9.0]])).tolist() == [0, 1]
    np.testing.assert_allclose(gnb_predict_proba(m, x).sum(axis=1), 1.0, atol=1e-12)


def test_gnb_zero_variance_feature_is_smoothed(raw_matrix):
    m = gnb_fit(raw_matrix.x, raw_matrix.labels)
    assert np.all(m.variances > 0)
    assert np.all(np.isfinite(m.joint_log_likelihood(raw_matrix.x)))


def test_gnb_empty_class_is_an_error():
    with pytest.raises(ValueError, match="class"):
        gnb_fit(np.zeros((3, 1)), np.array([0, 0, 2]), n_classes=3)


def test_tree_root_matches_split_oracle(raw_matrix):
    x, y = raw_matrix.x, raw_matrix.labels
    t = tree_fit(x, y, max_depth=1)
    assert (int(t.feature[0]), float(t.threshold[0])) == split_oracle(x, y, 6, range(x.shape[1]), 1)


def test_unbounded_tree_fits_training_data(raw_matrix):
    x, y = raw_matrix.x, raw_matrix.labels
    t = tree_fit(x, y)
    _, first = np.unique(x, axis=0, return_index=True)
    assert np.array_equal(tree_predict(t, x[first]), y[first])


def test_tree_depth_limit_and_min_leaf(raw_matrix):
    x, y = raw_matrix.x, raw_matrix.labels
    t = tree_fit(x, y, max_depth=2, min_leaf=10)
    assert t.depth.max() <= 2
    leaf_sizes = t.counts[t.leaves()].sum(axis=1)
    assert leaf_sizes.min() >= 10


def test_tree_on_single_class_is_one_leaf():
    t = tree_fit(np.random.default_rng(0).normal(size=(10, 3)), np.full(10, 4))
    assert t.n_nodes == 1 and tree_predict(t, np.zeros((2, 3))).tolist() == [4, 4]


def test_forest_n1_identity_sample_equals_tree(raw_matrix):
    x, y = raw_matrix.x, raw_matrix.labels
    f = forest_fit(x, y, n_estimators=1, max_depth=3, max_features=None, bootstrap=False)
    t = tree_fit(x, y, max_depth=3)
    assert np.array_equal(forest_predict(f, x), tree_predict(t, x))


def test_forest_is_seed_reproducible(raw_matrix):
    x, y = raw_matrix.x, raw_matrix.labels
    a = forest_fit(x, y, n_estimators=10, seed=5)
    b = forest_fit(x, y, n_estimators=10, seed=5)
    assert all(np.array_equal(s, t) for s, t in zip(a.samples, b.samples))
    assert np.array_equal(forest_predict(a, x), forest_predict(b, x))
    assert a.max_features == 11
    assert 0.0 <= forest_oob_accuracy(a, x, y) <= 1.0


@pytest.mark.parametrize("method", [KnnMethod(5), GnbMethod(), TreeMethod(), ForestMethod(5, 3),
                                    ShallowAnnMethod()])
def test_cv_adapters_return_label_predictors(method, raw_matrix):
    x, y = raw_matrix.x, raw_matrix.labels
    pred = method.fit(x[::2], y[::2], 0)(x[1::2])
    assert pred.shape == (179,) and set(pred) <= set(range(6))
    assert isinstance(method.describe(), dict)


def test_tree_with_feature_subsampling_needs_rng():
    with pytest.raises(ValueError):
        tree_fit(np.zeros((4, 2)), np.array([0, 1, 0, 1]), max_features=1)
    t = tree_fit(np.eye(4), np.array([0, 1, 0, 1]), max_features=2, rng=make_rng(0))
    assert t.n_nodes >= 1
