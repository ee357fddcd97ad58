"""Dense float64 matrix helpers, seeded generators and finite differences.

Matrices are plain 2-D ``numpy.ndarray`` objects of dtype float64. Random
streams come from numpy's PCG64 bit generator, whose output for a given seed
is fixed across platforms and numpy versions.
"""

from __future__ import annotations

import hashlib
import math
import struct

import numpy as np

from .errors import NumericError, ShapeError

_OPS = {"add": np.add, "sub": np.subtract, "mul": np.multiply}


def as_matrix(a, name="matrix"):
    """Return ``a`` as a C-contiguous float64 2-D array, rejecting NaN/Inf."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericError(f"{name} contains non-finite entries")
    return m


def identity(n):
    return np.eye(n, dtype=np.float64)


def matmul(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def elementwise(a, b, op):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"elementwise {op}: shapes {a.shape} and {b.shape} differ")
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}; expected one of {sorted(_OPS)}") from None
    return fn(a, b)


def numeric_gradient(f, x, eps=1e-5):
    """Central-difference gradient of scalar ``f`` at vector ``x``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = np.array(x, dtype=np.float64).ravel()
    grad = np.empty_like(x)
    for i in range(x.size):
        orig = x[i]
        x[i] = orig + eps
        hi = float(f(x))
        x[i] = orig - eps
        lo = float(f(x))
        x[i] = orig
        if not (math.isfinite(hi) and math.isfinite(lo)):
            raise NumericError(f"f is not finite near coordinate {i}")
        grad[i] = (hi - lo) / (2.0 * eps)
    return grad


def derive_seed(seed, *keys):
    """Child seed from a parent seed and a path of labels/indices.

    Hashes the parent and keys with BLAKE2b so sibling streams are
    independent and the result does not depend on call order.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<Q", int(seed) & 0xFFFFFFFFFFFFFFFF))
    for key in keys:
        h.update(b"\x1f")
        h.update(str(key).encode())
    return int.from_bytes(h.digest(), "little")


def make_rng(seed):
    """PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
