"""The compiled loop kernels and their numpy twins must agree exactly."""

import os
import subprocess
import sys

import numpy as np
import pytest

from _oracles import knn_oracle, split_oracle
from derm2vec import kernels
from derm2vec._jit import HAVE_NUMBA


def int_data(rng, n, d, hi=4):
    return rng.integers(0, hi, size=(n, d)).astype(np.float64)


@pytest.mark.parametrize("seed", range(10))
def test_knn_loops_vec_and_oracle_agree(seed):
    rng = np.random.default_rng(seed)
    n, d, k = int(rng.integers(5, 60)), int(rng.integers(1, 6)), int(rng.integers(1, 6))
    tx, ty = int_data(rng, n, d), rng.integers(0, 3, size=n)
    qx = int_data(rng, 15, d)
    k = min(k, n)
    a = kernels.knn_predict_loops(tx, ty, qx, k, 3)
    b = kernels.knn_predict_vec(tx, ty, qx, k, 3)
    assert np.array_equal(a, b)
    assert np.array_equal(a, knn_oracle(tx, ty, qx, k, 3))


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("min_leaf", [1, 3])
def test_split_loops_vec_and_oracle_agree(seed, min_leaf):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(2, 60)), int(rng.integers(1, 6))
    x, y = int_data(rng, n, d), rng.integers(0, 3, size=n)
    feats = np.arange(d, dtype=np.int64)
    a = kernels.best_split_loops(x, y, 3, feats, min_leaf)
    b = kernels.best_split_vec(x, y, 3, feats, min_leaf)
    assert (int(a[0]), float(a[1])) == (int(b[0]), float(b[1]))
    assert (int(a[0]), float(a[1])) == split_oracle(x, y, 3, feats, min_leaf)


def test_split_on_pure_or_constant_node_is_none():
    x = np.ones((5, 2))
    assert kernels.best_split_vec(x, np.zeros(5, dtype=np.int64), 2, np.arange(2), 1)[0] == -1
    assert kernels.best_split_loops(x, np.array([0, 1, 0, 1, 0]), 2, np.arange(2), 1)[0] == -1


def test_tree_apply_agree(rng):
    # root splits on f0 <= 0.5, right child on f1 <= 1.5
    feature = np.array([0, -1, 1, -1, -1])
    threshold = np.array([0.5, 0, 1.5, 0, 0])
    left = np.array([1, -1, 3, -1, -1])
    right = np.array([2, -1, 4, -1, -1])
    x = int_data(rng, 40, 2)
    a = kernels.tree_apply_loops(x, feature, threshold, left, right)
    assert np.array_equal(a, kernels.tree_apply_vec(x, feature, threshold, left, right))
    expect = np.where(x[:, 0] <= 0.5, 1, np.where(x[:, 1] <= 1.5, 3, 4))
    assert np.array_equal(a, expect)


def test_adam_kernels_agree_and_match_formula(rng):
    p0, g = rng.normal(size=50), rng.normal(size=50)
    state = []
    for fn in (kernels.adam_step_loops, kernels.adam_step_vec):
        p, m, v = p0.copy(), np.zeros(50), np.zeros(50)
        for t in (1, 2, 3):
            fn(p, g, m, v, 1e-3, 0.9, 0.999, 1e-8, t)
        state.append(p)
    np.testing.assert_allclose(state[0], state[1], rtol=0, atol=1e-15)
    # three identical gradients: bias-corrected moments equal g and g^2
    np.testing.assert_allclose(state[0], p0 - 3 * 1e-3 * g / (np.abs(g) + 1e-8), rtol=1e-9)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_loop_kernels_are_compiled():
    assert hasattr(kernels.knn_predict_loops, "signatures")


def _backend(value):
    env = dict(os.environ, DERM2VEC_BACKEND=value)
    return subprocess.run([sys.executable, "-c", "import derm2vec; print(derm2vec.BACKEND)"],
                          env=env, capture_output=True, text=True)


def test_backend_flag_selects_numpy():
    assert _backend("numpy").stdout.strip() == "numpy"


def test_backend_flag_rejects_unknown_values():
    r = _backend("cuda")
    assert r.returncode != 0 and "DERM2VEC_BACKEND" in r.stderr
