"""Hot inner loops, each in two flavours.

``*_loops`` functions are written as explicit loops and compiled with numba
when the numba backend is active; ``*_vec`` functions are the pure-numpy
equivalents. Both return identical results: distances are summed in the same
(sequential) feature order and split scores are compared as exact integer
fractions, so ties resolve the same way on either path.

Module-level names without a suffix dispatch to the active backend.
"""

import numpy as np

from ._jit import USE_NUMBA, njit

# ---------------------------------------------------------------- kNN


def _knn_loops(train_x, train_y, test_x, k, n_classes):
    n, d = train_x.shape
    out = np.empty(test_x.shape[0], dtype=np.int64)
    dist = np.empty(n, dtype=np.float64)
    votes = np.empty(n_classes, dtype=np.int64)
    for q in range(test_x.shape[0]):
        for i in range(n):
            acc = 0.0
            for j in range(d):
                diff = test_x[q, j] - train_x[i, j]
                acc += diff * diff
            dist[i] = acc
        order = np.argsort(dist, kind="mergesort")
        votes[:] = 0
        for r in range(k):
            votes[train_y[order[r]]] += 1
        best = 0
        for c in range(1, n_classes):
            if votes[c] > votes[best]:
                best = c
        out[q] = best
    return out


def _knn_vec(train_x, train_y, test_x, k, n_classes):
    m = test_x.shape[0]
    dist = np.zeros((m, train_x.shape[0]))
    for j in range(train_x.shape[1]):
        diff = test_x[:, j:j + 1] - train_x[:, j]
        dist += diff * diff
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    neigh = train_y[order]
    votes = np.zeros((m, n_classes), dtype=np.int64)
    for r in range(k):
        votes[np.arange(m), neigh[:, r]] += 1
    return np.argmax(votes, axis=1).astype(np.int64)


# ---------------------------------------------------------------- CART split search
#
# A split is scored by  sl/nl + sr/nr  where sl, sr are the sums of squared class
# counts in each child; maximising it minimises weighted Gini impurity. Scores
# are kept as (numerator, denominator) = (sl*nr + sr*nl, nl*nr) and compared by
# cross-multiplication in int64.


def _best_split_loops(x, y, n_classes, features, min_leaf):
    n = x.shape[0]
    total = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        total[y[i]] += 1
    parent_sq = 0
    for c in range(n_classes):
        parent_sq += total[c] * total[c]

    best_f = -1
    best_t = 0.0
    best_num = 0
    best_den = 1
    left = np.zeros(n_classes, dtype=np.int64)
    for f in features:
        col = x[:, f]
        order = np.argsort(col, kind="mergesort")
        left[:] = 0
        sl = 0
        for pos in range(n - 1):
            c = y[order[pos]]
            # (a+1)^2 - a^2 = 2a + 1
            sl += 2 * left[c] + 1
            left[c] += 1
            lo = col[order[pos]]
            hi = col[order[pos + 1]]
            if not lo < hi:
                continue
            nl = pos + 1
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            sr = 0
            for cc in range(n_classes):
                r = total[cc] - left[cc]
                sr += r * r
            num = sl * nr + sr * nl
            den = nl * nr
            # must beat the unsplit node: num/den > parent_sq/n
            if num * n <= parent_sq * den:
                continue
            if best_f < 0 or num * best_den > best_num * den:
                best_f = f
                best_t = (lo + hi) / 2.0
                best_num = num
                best_den = den
    return best_f, best_t


def _best_split_vec(x, y, n_classes, features, min_leaf):
    n = x.shape[0]
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), y] = 1
    total = onehot.sum(axis=0)
    parent_sq = int((total * total).sum())

    best = None  # (num, den, f, t)
    for f in features:
        col = x[:, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = total - left
        nl = np.arange(1, n, dtype=np.int64)
        nr = n - nl
        ok = (xs[:-1] < xs[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
        if not ok.any():
            continue
        sl = (left * left).sum(axis=1)
        sr = (right * right).sum(axis=1)
        num = sl * nr + sr * nl
        den = nl * nr
        ok &= num * n > parent_sq * den
        idx = np.flatnonzero(ok)
        if idx.size == 0:
            continue
        # float pre-filter, then exact comparison among the near-maximal candidates
        score = num[idx] / den[idx]
        near = idx[score >= score.max() * (1 - 1e-12)]
        for p in near:
            cand = (int(num[p]), int(den[p]))
            if best is None or cand[0] * best[1] > best[0] * cand[1]:
                best = (cand[0], cand[1], int(f), (xs[p] + xs[p + 1]) / 2.0)
    if best is None:
        return -1, 0.0
    return best[2], best[3]


# ---------------------------------------------------------------- tree traversal


def _tree_apply_loops(x, feature, threshold, left, right):
    out = np.empty(x.shape[0], dtype=np.int64)
    for i in range(x.shape[0]):
        node = 0
        while feature[node] >= 0:
            if x[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


def _tree_apply_vec(x, feature, threshold, left, right):
    node = np.zeros(x.shape[0], dtype=np.int64)
    rows = np.arange(x.shape[0])
    active = feature[node] >= 0
    while active.any():
        r = rows[active]
        nd = node[active]
        go_left = x[r, feature[nd]] <= threshold[nd]
        node[active] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return node


# ---------------------------------------------------------------- Adam


def _adam_loops(param, grad, m, v, lr, beta1, beta2, eps, t):
    """In-place Adam update on flat arrays."""
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for i in range(param.size):
        g = grad[i]
        m[i] = beta1 * m[i] + (1.0 - beta1) * g
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g)
        param[i] -= lr * (m[i] / c1) / (np.sqrt(v[i] / c2) + eps)


def _adam_vec(param, grad, m, v, lr, beta1, beta2, eps, t):
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * (grad * grad)
    param -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


knn_predict_loops = njit(_knn_loops)
best_split_loops = njit(_best_split_loops)
tree_apply_loops = njit(_tree_apply_loops)
adam_step_loops = njit(_adam_loops)

knn_predict_vec = _knn_vec
best_split_vec = _best_split_vec
tree_apply_vec = _tree_apply_vec
adam_step_vec = _adam_vec

if USE_NUMBA:
    knn_predict = knn_predict_loops
    best_split = best_split_loops
    tree_apply = tree_apply_loops
    adam_step = adam_step_loops
else:
    knn_predict = knn_predict_vec
    best_split = best_split_vec
    tree_apply = tree_apply_vec
    adam_step = adam_step_vec
