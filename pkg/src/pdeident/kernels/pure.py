"""NumPy fallback kernels, used when the compiled extension is unavailable."""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"


def correlate_axis(values: np.ndarray, weights: np.ndarray, axis: int) -> np.ndarray:
    """Weighted moving sum ("valid" correlation) along one axis of a 2-D array."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.ndim != 2:
        raise ValueError("expected a 2-D array")
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a nonempty 1-D array")
    if axis not in (0, 1):
        raise ValueError("axis must be 0 or 1")
    n = w.size
    if v.shape[axis] < n:
        raise ValueError(f"axis {axis} has {v.shape[axis]} nodes, needs {n}")
    out_len = v.shape[axis] - n + 1
    sl: list = [slice(None), slice(None)]
    sl[axis] = slice(0, out_len)
    acc = w[0] * v[tuple(sl)]
    for k in range(1, n):
        sl[axis] = slice(k, k + out_len)
        acc += w[k] * v[tuple(sl)]
    return acc


def singular_values(a: np.ndarray) -> np.ndarray:
    """Descending singular values of a dense 2-D matrix."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return np.linalg.svd(m, compute_uv=False)


def two_column_singular_values(stack: np.ndarray) -> np.ndarray:
    """Singular values for a batch of m-by-2 matrices, shape (N, m, 2) -> (N, 2).

    A single exact one-sided Jacobi rotation orthogonalizes two columns; the
    singular values are the rotated column norms (no Gram eigenvalues, so the
    small value keeps absolute accuracy near eps * sigma_1).
    """
    a = np.asarray(stack, dtype=float)
    if a.ndim != 3 or a.shape[2] != 2:
        raise ValueError("expected shape (N, m, 2)")
    c1 = a[:, :, 0]
    c2 = a[:, :, 1]
    g11 = np.einsum("ij,ij->i", c1, c1)
    g22 = np.einsum("ij,ij->i", c2, c2)
    g12 = np.einsum("ij,ij->i", c1, c2)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        tau = (g22 - g11) / (2.0 * g12)
        sgn = np.where(tau >= 0, 1.0, -1.0)
        t = sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
    t = np.where(g12 != 0.0, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = c * t
    b1 = c[:, None] * c1 - s[:, None] * c2
    b2 = s[:, None] * c1 + c[:, None] * c2
    n1 = np.sqrt(np.einsum("ij,ij->i", b1, b1))
    n2 = np.sqrt(np.einsum("ij,ij->i", b2, b2))
    return np.stack([np.maximum(n1, n2), np.minimum(n1, n2)], axis=1)
