"""Uniform space-time grids, sampled fields, and the noise model.

Noise is i.i.d. Gaussian per grid node.  Its standard deviation is tied to
the sampled field through ``convention``:

* ``"paper"``:  sigma = alpha^2 * ||u||^2   (noise level scales quadratically)
* ``"linear"``: sigma = alpha   * ||u||

and ``norm`` picks the meaning of ||u||:

* ``"continuous"`` (default): Riemann approximation of the domain L2 norm,
  ||u||^2 = mean(u^2) * area.  Grid-resolution independent.
* ``"grid"``: plain discrete 2-norm over all grid values, ||u||^2 = sum(u^2).

The sup bound ``epsilon`` converts sigma into a high-probability uniform
bound on the noise: P(max |e_ij| > epsilon) <= delta by a Gaussian union
bound over the N grid nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import funclib

DEFAULT_DELTA = 0.01
FP_FLOOR_KAPPA = 8.0


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid: origin, spacings, node counts per axis."""

    t0: float
    x0: float
    h_t: float
    h_x: float
    n_t: int
    n_x: int

    def __post_init__(self):
        if not (self.h_t > 0 and self.h_x > 0):
            raise ValueError("grid spacings must be positive")
        if self.n_t < 1 or self.n_x < 1:
            raise ValueError("need at least 1 node per axis")

    @classmethod
    def from_domain(
        cls,
        t_range: tuple[float, float],
        x_range: tuple[float, float],
        n_t: int,
        n_x: int,
    ) -> "GridSpec":
        t0, t1 = t_range
        x0, x1 = x_range
        if not (t1 > t0 and x1 > x0):
            raise ValueError("degenerate domain")
        if n_t < 2 or n_x < 2:
            raise ValueError("from_domain needs at least 2 nodes per axis")
        return cls(t0, x0, (t1 - t0) / (n_t - 1), (x1 - x0) / (n_x - 1), n_t, n_x)

    @property
    def t_max(self) -> float:
        return self.t0 + (self.n_t - 1) * self.h_t

    @property
    def x_max(self) -> float:
        return self.x0 + (self.n_x - 1) * self.h_x

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_t, self.n_x)

    def t_coords(self) -> np.ndarray:
        return self.t0 + self.h_t * np.arange(self.n_t)

    def x_coords(self) -> np.ndarray:
        return self.x0 + self.h_x * np.arange(self.n_x)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """Full coordinate meshes with t along axis 0 and x along axis 1."""
        return np.meshgrid(self.t_coords(), self.x_coords(), indexing="ij")

    def interior(self, trim_t: int, trim_x: int) -> "GridSpec":
        """Subgrid after dropping trim nodes from each end of each axis."""
        if trim_t < 0 or trim_x < 0:
            raise ValueError("trims must be nonnegative")
        n_t = self.n_t - 2 * trim_t
        n_x = self.n_x - 2 * trim_x
        if n_t < 1 or n_x < 1:
            raise ValueError(f"trim ({trim_t}, {trim_x}) exhausts the {self.n_t}x{self.n_x} grid")
        return GridSpec(
            self.t0 + trim_t * self.h_t,
            self.x0 + trim_x * self.h_x,
            self.h_t,
            self.h_x,
            n_t,
            n_x,
        )


@dataclass(frozen=True)
class Field:
    """Values sampled on a grid, t-major layout, shape (n_t, n_x)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.isfinite(v).all():
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def trimmed(self, trim_t: int, trim_x: int) -> "Field":
        if trim_t == 0 and trim_x == 0:
            return self
        sub = self.values[
            trim_t : self.grid.n_t - trim_t, trim_x : self.grid.n_x - trim_x
        ]
        return Field(self.grid.interior(trim_t, trim_x), sub)


def sample(fn: funclib.TestFunction, grid: GridSpec) -> Field:
    """Sample fn on every grid node; rejects grids leaving the admissible domain."""
    tt, xx = grid.meshes()
    values = funclib.exact_derivative(fn, 0, 0, tt, xx)
    return Field(grid, values)


def sup_noise_bound(sigma: float, n_points: int, delta: float = DEFAULT_DELTA) -> float:
    """High-probability uniform bound for N i.i.d. N(0, sigma^2) samples.

    Union bound: P(max |e| > sigma sqrt(2 ln(2N/delta))) <= delta.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if n_points < 1:
        raise ValueError("need at least one sample")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    return sigma * math.sqrt(2.0 * math.log(2.0 * n_points / delta))


@dataclass(frozen=True)
class NoiseModel:
    """Per-node Gaussian noise: level alpha, derived sigma and sup bound epsilon."""

    alpha: float
    sigma: float
    epsilon: float
    seed: int
    delta: float = DEFAULT_DELTA
    convention: str = "paper"
    norm: str = "continuous"

    @classmethod
    def for_field(
        cls,
        clean: Field,
        alpha: float,
        seed: int,
        delta: float = DEFAULT_DELTA,
        convention: str = "paper",
        norm: str = "continuous",
    ) -> "NoiseModel":
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if convention not in ("paper", "linear"):
            raise ValueError(f"unknown noise convention {convention!r}")
        if norm not in ("continuous", "grid"):
            raise ValueError(f"unknown norm choice {norm!r}")
        v = clean.values
        if norm == "continuous":
            g = clean.grid
            area = (g.t_max - g.t0) * (g.x_max - g.x0)
            norm_sq = float(np.mean(v * v) * area)
        else:
            norm_sq = float(np.sum(v * v))
        if convention == "paper":
            sigma = alpha**2 * norm_sq
        else:
            sigma = alpha * math.sqrt(norm_sq)
        epsilon = sup_noise_bound(sigma, v.size, delta) if sigma > 0 else 0.0
        return cls(alpha, sigma, epsilon, seed, delta, convention, norm)


def add_noise(clean: Field, noise: NoiseModel) -> Field:
    """Draw one noisy copy of the field; alpha = 0 returns the values unchanged."""
    if noise.sigma == 0.0:
        return Field(clean.grid, clean.values.copy())
    rng = np.random.default_rng(noise.seed)
    e = rng.normal(0.0, noise.sigma, size=clean.values.shape)
    return Field(clean.grid, clean.values + e)


def representation_floor(values: np.ndarray, kappa: float = FP_FLOOR_KAPPA) -> float:
    """Uniform bound on float64 storage + stencil round-off, as extra sup noise.

    Rounding a value to float64 perturbs it by at most eps/2 * |value| and a
    subsequent length-(n+1) weighted sum accumulates at most gamma_n ~ n*eps
    relative error; kappa = 8 covers both with margin for the stencil sizes
    used here (n <= 10).
    """
    v = np.asarray(values)
    if v.size == 0:
        return 0.0
    return kappa * np.finfo(np.float64).eps * float(np.max(np.abs(v)))
