"""Assembly of the feature matrix and per-point gradient stacks.

Every assembled object carries a certified Frobenius-norm perturbation
budget: a bound on how far the noisy, finite-difference-estimated version
can lie from its exact counterpart, given a uniform sample perturbation
bound epsilon and smoothness constants for the truncation terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import findiff
from .features import Feature, FeatureSpec
from .findiff import BoundConstants
from .grid import Field, GridSpec


class ShapeError(ValueError):
    """Matrix shape requirements (more rows than columns) violated."""


def _feature_trims(spec_features, fd_order: int) -> tuple[int, int]:
    """Interior margin consumed by the widest stencil on each axis."""
    half = fd_order // 2
    trim_t = max((half if f.order_t > 0 else 0) for f in spec_features)
    trim_x = max((half if f.order_x > 0 else 0) for f in spec_features)
    return trim_t, trim_x


def _feature_field(field: Field, feat: Feature, fd_order: int) -> Field:
    if feat.kind == "t":
        tt, _ = field.grid.meshes()
        return Field(field.grid, tt)
    if feat.kind == "x":
        _, xx = field.grid.meshes()
        return Field(field.grid, xx)
    return findiff.differentiate(field, feat.order_t, feat.order_x, fd_order)


def _feature_bound(
    feat: Feature, fd_order: int, grid: GridSpec, epsilon: float, constants: BoundConstants
) -> float:
    """Uniform error bound for one assembled column/entry."""
    if feat.kind in ("t", "x"):
        return 0.0
    if feat.order_t > 0 and feat.order_x > 0:
        return findiff.e_fd_mixed(
            fd_order, feat.order_t, feat.order_x, grid.h_t, grid.h_x, epsilon, constants
        )
    if feat.order_t > 0:
        return findiff.e_fd(fd_order, feat.order_t, grid.h_t, epsilon, constants)
    if feat.order_x > 0:
        return findiff.e_fd(fd_order, feat.order_x, grid.h_x, epsilon, constants)
    return float(epsilon)


@dataclass(frozen=True)
class FeatureMatrix:
    """Feature values on the common interior grid, one column per feature."""

    spec: FeatureSpec
    fd_order: int
    grid: GridSpec
    values: np.ndarray  # (m, p)
    column_bounds: np.ndarray  # (p,) uniform per-entry bounds
    eps_g: float
    trim_t: int
    trim_x: int

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def build_feature_matrix(
    field: Field,
    spec: FeatureSpec,
    fd_order: int,
    epsilon: float,
    constants: BoundConstants,
) -> FeatureMatrix:
    """Evaluate every feature on the shared interior grid and stack columns.

    eps_g bounds the Frobenius distance to the exact feature matrix:
    eps_g^2 = m * sum_col bound_col^2 (each of the m rows can be off by at
    most bound_col in column col).
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    trim_t, trim_x = _feature_trims(spec.features, fd_order)
    inner = field.grid.interior(trim_t, trim_x)
    cols = []
    bounds = []
    for feat in spec.features:
        col = _feature_field(field, feat, fd_order)
        extra_t = trim_t - (field.grid.n_t - col.grid.n_t) // 2
        extra_x = trim_x - (field.grid.n_x - col.grid.n_x) // 2
        col = col.trimmed(extra_t, extra_x)
        cols.append(col.values.ravel())
        bounds.append(_feature_bound(feat, fd_order, field.grid, epsilon, constants))
    values = np.column_stack(cols)
    m, p = values.shape
    if m <= p:
        raise ShapeError(f"need more interior points than features, got {m} x {p}")
    bounds_arr = np.asarray(bounds, dtype=float)
    eps_g = math.sqrt(m * float(np.sum(bounds_arr**2)))
    return FeatureMatrix(spec, fd_order, inner, values, bounds_arr, eps_g, trim_t, trim_x)


@dataclass(frozen=True)
class JacobianStack:
    """Gradient of the feature map at every interior point: shape (N, p, 2).

    Row r of matrix q holds (d feature_r / dt, d feature_r / dx) at point q.
    """

    spec: FeatureSpec
    fd_order: int
    grid: GridSpec
    matrices: np.ndarray  # (N, p, 2)
    entry_bounds: np.ndarray  # (p, 2) uniform per-point bounds
    eps_jg: float
    trim_t: int
    trim_x: int

    @property
    def n_points(self) -> int:
        return self.matrices.shape[0]

    def points(self) -> np.ndarray:
        """(N, 2) array of (t, x) coordinates matching the stack order."""
        tt, xx = self.grid.meshes()
        return np.column_stack([tt.ravel(), xx.ravel()])


def build_jacobian_stack(
    field: Field,
    spec: FeatureSpec,
    fd_order: int,
    epsilon: float,
    constants: BoundConstants,
) -> JacobianStack:
    """Estimate the feature-map gradient at every shared interior point.

    eps_jg bounds, uniformly over points, the Frobenius distance of each
    estimated p-by-2 matrix from its exact counterpart:
    eps_jg^2 = sum over entries of the per-entry bound squared.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    entry_feats: list[tuple[Feature, Feature] | None] = []
    grad_feats: list[Feature] = []
    for feat in spec.features:
        if feat.kind == "u":
            gt = Feature("u", feat.order_t + 1, feat.order_x)
            gx = Feature("u", feat.order_t, feat.order_x + 1)
            entry_feats.append((gt, gx))
            grad_feats.extend((gt, gx))
        else:
            entry_feats.append(None)  # coordinate feature: exact constant gradient
    half = fd_order // 2
    trim_t = max((half if g.order_t > 0 else 0) for g in grad_feats) if grad_feats else 0
    trim_x = max((half if g.order_x > 0 else 0) for g in grad_feats) if grad_feats else 0
    inner = field.grid.interior(trim_t, trim_x)
    n_points = inner.n_t * inner.n_x
    p = len(spec)
    matrices = np.empty((n_points, p, 2))
    bounds = np.zeros((p, 2))
    for r, (feat, grads) in enumerate(zip(spec.features, entry_feats)):
        if grads is None:
            matrices[:, r, 0] = 1.0 if feat.kind == "t" else 0.0
            matrices[:, r, 1] = 1.0 if feat.kind == "x" else 0.0
            continue
        for c, g in ((0, grads[0]), (1, grads[1])):
            est = findiff.differentiate(field, g.order_t, g.order_x, fd_order)
            extra_t = trim_t - (field.grid.n_t - est.grid.n_t) // 2
            extra_x = trim_x - (field.grid.n_x - est.grid.n_x) // 2
            est = est.trimmed(extra_t, extra_x)
            matrices[:, r, c] = est.values.ravel()
            bounds[r, c] = _feature_bound(g, fd_order, field.grid, epsilon, constants)
    eps_jg = math.sqrt(float(np.sum(bounds**2)))
    return JacobianStack(spec, fd_order, inner, matrices, bounds, eps_jg, trim_t, trim_x)


def effective_epsilon(budget: float, kind: str = "G") -> float:
    """Pass a Frobenius budget through to the threshold tests.

    The explicit seam asserts the convention that eps_g / eps_jg are already
    on the same (norm) scale the thresholds expect; no rescaling happens.
    """
    if kind not in ("G", "J_G"):
        raise ValueError(f"unknown budget kind {kind!r}")
    b = float(budget)
    if b < 0 or not math.isfinite(b):
        raise ValueError("budget must be finite and nonnegative")
    return b
