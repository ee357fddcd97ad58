"""Brute-force reference implementations used by the tests.

They trade speed for obviousness: exact rational arithmetic, full scans, no
vectorisation.
"""

from fractions import Fraction

import numpy as np

from derm2vec.core import numeric_gradient
from derm2vec.neural import NetworkSpec, activate, backward, forward, init_network, loss_value


def knn_oracle(train_x, train_y, test_x, k, n_classes):
    """Exact squared distances; ties by lower training index, votes by lower class."""
    out = []
    for q in test_x:
        dist = [(sum((Fraction(float(a)) - Fraction(float(b))) ** 2 for a, b in zip(q, row)), i)
                for i, row in enumerate(train_x)]
        dist.sort()
        votes = [0] * n_classes
        for _, i in dist[:k]:
            votes[int(train_y[i])] += 1
        out.append(max(range(n_classes), key=lambda c: (votes[c], -c)))
    return np.array(out, dtype=np.int64)


def gini(counts):
    n = sum(counts)
    return Fraction(1) - sum(Fraction(c, n) ** 2 for c in counts)


def split_oracle(x, y, n_classes, features, min_leaf):
    """Exhaustive search for the Gini-optimal axis split.

    Returns ``(feature, threshold)`` or ``(-1, 0.0)`` when no split lowers the
    weighted impurity below the parent's.
    """
    n = len(y)
    parent = gini(np.bincount(y, minlength=n_classes).tolist())
    best = None
    for f in features:
        vals = sorted(set(float(v) for v in x[:, f]))
        for lo, hi in zip(vals, vals[1:]):
            t = (lo + hi) / 2.0
            mask = x[:, f] <= t
            nl = int(mask.sum())
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            cl = np.bincount(y[mask], minlength=n_classes).tolist()
            cr = np.bincount(y[~mask], minlength=n_classes).tolist()
            w = Fraction(nl, n) * gini(cl) + Fraction(nr, n) * gini(cr)
            if w >= parent:
                continue
            # strict < keeps the first (lowest feature, lowest threshold) on ties
            if best is None or w < best[0]:
                best = (w, int(f), t)
    return (-1, 0.0) if best is None else (best[1], best[2])


def random_network(rng, n_layers, loss, dropout, width_range=(2, 6)):
    """Small random MLP ending in the activation the loss requires."""
    dims = [int(rng.integers(*width_range)) for _ in range(n_layers + 1)]
    hidden = tuple(dims[1:-1])
    out_act = {"softmax_cross_entropy": "softmax", "binary_cross_entropy": "sigmoid",
               "mean_squared_error": str(rng.choice(["linear", "sigmoid"]))}[loss]
    hidden_act = str(rng.choice(["relu", "sigmoid", "linear"]))
    if loss == "softmax_cross_entropy" and dims[-1] < 2:
        dims[-1] = 2
    spec = NetworkSpec.mlp(dims[0], hidden, dims[-1], dropout=dropout if hidden else 0.0,
                           hidden_activation=hidden_act, output_activation=out_act, loss=loss)
    net = init_network(spec, rng)
    # non-zero biases keep ReLU pre-activations off the kink even for rows dropout zeroed
    for b in net.biases:
        b[...] = rng.uniform(0.1, 0.5, size=b.shape) * rng.choice([-1.0, 1.0], size=b.shape)
    return net


def random_targets(rng, n, d, loss):
    if loss == "softmax_cross_entropy":
        t = np.zeros((n, d))
        t[np.arange(n), rng.integers(0, d, size=n)] = 1.0
        return t
    if loss == "binary_cross_entropy":
        return rng.uniform(0.0, 1.0, size=(n, d))
    return rng.normal(size=(n, d))


def gradient_relative_errors(net, x, targets, rng=None, frozen_dropout=False, eps=1e-5):
    """Per-parameter |backprop - central difference| / max(|a|, |b|, 1e-7)."""
    masks = None
    if frozen_dropout:
        tr = forward(net, x, "train", rng=rng)
        masks = tr.masks
    mode = "train" if masks is not None else "eval"

    tr = forward(net, x, mode, masks=masks)
    gw, gb = backward(net, tr, targets)
    analytic = np.concatenate([g.ravel() for pair in zip(gw, gb) for g in pair])

    probe = net.copy()

    def f(flat):
        probe.set_flat(flat)
        return loss_value(forward(probe, x, mode, masks=masks).output, targets, net.spec.loss)

    numeric = numeric_gradient(f, net.get_flat(), eps=eps)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-7)
    return np.abs(analytic - numeric) / denom


def relu_margin(net, x, masks=None):
    """Smallest |pre-activation| of any ReLU unit; finite differences need it away from 0."""
    a = np.asarray(x, dtype=np.float64)
    margin = np.inf
    for k, layer in enumerate(net.spec.layers):
        z = a @ net.weights[k] + net.biases[k]
        if layer.activation == "relu":
            margin = min(margin, float(np.min(np.abs(z))))
        a = activate(z, layer.activation)
        if masks is not None and masks[k] is not None:
            a = a * masks[k]
    return margin
