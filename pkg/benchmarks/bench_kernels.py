"""Compiled loop kernels vs their numpy twins on dermatology-sized inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Both paths are imported directly, so the ``DERM2VEC_BACKEND`` flag does not
matter here. Each kernel is called once before timing so numba's compile (or
cache load) stays out of the numbers. Outputs are also checked for equality.
"""

import argparse
import timeit

import numpy as np

from derm2vec import kernels
from derm2vec._jit import HAVE_NUMBA
from derm2vec.baselines import tree_fit
from derm2vec.data import load_dataset


def cases(fm):
    x, y = fm.x, fm.labels
    train, test = x[:322], x[322:]
    feats = np.arange(x.shape[1], dtype=np.int64)
    tree = tree_fit(x, y)
    rng = np.random.default_rng(0)
    n_params = 129 * 100 + 100 + 100 * 6 + 6
    p, g = rng.normal(size=n_params), rng.normal(size=n_params)

    def adam(fn):
        state = (p.copy(), np.zeros(n_params), np.zeros(n_params))
        return lambda: fn(state[0], g, state[1], state[2], 1e-3, 0.9, 0.999, 1e-8, 1)

    return [
        ("knn (322 train x 36 queries, k=5)",
         lambda fn: lambda: fn(train, y[:322], test, 5, 6),
         kernels.knn_predict_loops, kernels.knn_predict_vec),
        ("best split (358 rows x 129 features)",
         lambda fn: lambda: fn(x, y, 6, feats, 1),
         kernels.best_split_loops, kernels.best_split_vec),
        (f"tree apply ({tree.n_nodes} nodes, 358 rows)",
         lambda fn: lambda: fn(x, tree.feature, tree.threshold, tree.left, tree.right),
         kernels.tree_apply_loops, kernels.tree_apply_vec),
        (f"adam step ({n_params} params)", adam,
         kernels.adam_step_loops, kernels.adam_step_vec),
    ]


def best_time(call, repeat, number):
    return min(timeit.repeat(call, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20)
    args = ap.parse_args()

    fm = load_dataset(age_scaling="none")
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'kernel':<40} {'numba (ms)':>11} {'numpy (ms)':>11} {'speedup':>8}  equal")
    for name, make, loops, vec in cases(fm):
        a, b = make(loops), make(vec)
        ra, rb = a(), b()
        equal = all(np.array_equal(u, v) for u, v in zip(np.atleast_1d(ra), np.atleast_1d(rb))) \
            if ra is not None else True
        ta = best_time(a, args.repeat, args.number)
        tb = best_time(b, args.repeat, args.number)
        print(f"{name:<40} {ta * 1e3:>11.3f} {tb * 1e3:>11.3f} {tb / ta:>7.1f}x  {equal}")


if __name__ == "__main__":
    main()
