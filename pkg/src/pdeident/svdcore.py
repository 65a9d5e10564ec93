"""Singular-value machinery: spectra, perturbation gaps, decision thresholds.

Thresholds can be *invalid* when the certified perturbation budget eps is too
large for the observed spectrum; invalidity is represented as None and is a
first-class outcome that classifiers must propagate, not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class SvResult:
    """Descending singular values and their extreme ratio."""

    sigmas: np.ndarray
    rho: float


def singular_values(matrix: np.ndarray) -> SvResult:
    """Spectrum of a nonzero 2-D matrix; rho = sigma_min / sigma_max in [0, 1].

    Wide matrices are transposed first (the spectrum is unchanged).
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("expected a nonempty 2-D matrix")
    if not np.isfinite(a).all():
        raise ValueError("matrix contains non-finite entries")
    if not a.any():
        raise ValueError("zero matrix has no defined spectrum ratio")
    if a.shape[0] < a.shape[1]:
        a = a.T
    sig = np.asarray(kernels.singular_values(a), dtype=float)
    return SvResult(sig, float(sig[-1] / sig[0]))


def weyl_gap(a: np.ndarray, e: np.ndarray) -> float:
    """max_k |sigma_k(a + e) - sigma_k(a)|; never exceeds the Frobenius norm of e."""
    a = np.asarray(a, dtype=float)
    e = np.asarray(e, dtype=float)
    if a.shape != e.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {e.shape}")
    sa = np.linalg.svd(a, compute_uv=False)
    sb = np.linalg.svd(a + e, compute_uv=False)
    return float(np.max(np.abs(sa - sb)))


def nonunique_threshold(eps: float, c1_low: float) -> float | None:
    """Ratio level T_nu: observing rho > T_nu certifies full rank (Unique side).

    Valid only while eps < c1_low, i.e. the perturbation cannot hide the top
    singular value; otherwise returns None.
    """
    if eps < 0 or not math.isfinite(eps):
        raise ValueError("eps must be finite and nonnegative")
    if not (c1_low > 0 and math.isfinite(c1_low)):
        raise ValueError("c1_low must be finite and positive")
    if c1_low - eps <= 0:
        return None
    return eps / (c1_low - eps)


def unique_threshold(eps: float, c_n: float, c1_up: float) -> float | None:
    """Ratio level T_u: observing rho < T_u certifies rank deficiency (NonUnique side).

    Valid only while eps < c_n; otherwise returns None.
    """
    if eps < 0 or not math.isfinite(eps):
        raise ValueError("eps must be finite and nonnegative")
    if not (c_n > 0 and math.isfinite(c_n)):
        raise ValueError("c_n must be finite and positive")
    if not (c1_up > 0 and math.isfinite(c1_up)):
        raise ValueError("c1_up must be finite and positive")
    if c_n > c1_up:
        raise ValueError(f"c_n={c_n} exceeds c1_up={c1_up}; inconsistent spectrum bounds")
    if c_n - eps <= 0:
        return None
    return (c_n - eps) / (c1_up + eps)
