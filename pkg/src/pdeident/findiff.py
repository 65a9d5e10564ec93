"""Central finite-difference stencils with certified error bounds.

Weights are generated in exact rational arithmetic as derivatives of the
Lagrange basis polynomials on n+1 equispaced nodes, evaluated at the center
node.  Every estimate comes with a two-part error budget:

* a truncation bound, from the polynomial interpolation remainder, valid
  whenever the sampled function has |d^(n+1)u| <= C_u along the stencil line;
* a noise amplification factor, sum |w_k| / h^l, which converts a uniform
  sample perturbation bound epsilon into an output perturbation bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .grid import Field

MAX_DERIV = 3


class GridMismatchError(ValueError):
    """Stencil spacing does not match the grid it is applied to."""


@dataclass(frozen=True)
class BoundConstants:
    """Smoothness constants entering the truncation bound.

    c_u bounds the relevant high-order derivatives of the sampled function;
    c_xi bounds the derivatives of the interpolation remainder point as it
    moves with the evaluation location.
    """

    c_u: float
    c_xi: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.c_u) and self.c_u >= 0):
            raise ValueError("c_u must be finite and nonnegative")
        if not (math.isfinite(self.c_xi) and self.c_xi >= 0):
            raise ValueError("c_xi must be finite and nonnegative")


def _poly_mul(p: list, q: list) -> list:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_deriv(p: list) -> list:
    return [p[i] * i for i in range(1, len(p))]


def _poly_eval(p: list, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


@lru_cache(maxsize=None)
def _rational_weights(n: int, l: int) -> tuple:
    """l-th derivative of each Lagrange basis on nodes 0..n, at node n/2.

    Exact Fractions; the runtime weight for spacing h is rational / h^l.
    """
    center = Fraction(n, 2)
    ws = []
    for k in range(n + 1):
        num = [Fraction(1)]
        den = 1
        for i in range(n + 1):
            if i == k:
                continue
            num = _poly_mul(num, [Fraction(-i), Fraction(1)])
            den *= k - i
        p = [c / den for c in num]
        for _ in range(l):
            p = _poly_deriv(p)
        ws.append(_poly_eval(p, center))
    return tuple(ws)


@lru_cache(maxsize=None)
def _omega_center_derivative(n: int, m: int) -> Fraction:
    """m-th derivative of the node polynomial prod_{k=0..n}(s - k) at s = n/2."""
    poly = [Fraction(1)]
    for k in range(n + 1):
        poly = _poly_mul(poly, [Fraction(-k), Fraction(1)])
    for _ in range(m):
        poly = _poly_deriv(poly)
    return _poly_eval(poly, Fraction(n, 2))


def _validate_order(n: int) -> None:
    if n < 2 or n % 2 != 0:
        raise ValueError(f"stencil order must be even and >= 2, got {n}")


@dataclass(frozen=True)
class Stencil:
    """Central stencil: n+1 weights estimating the deriv-th derivative at the middle node."""

    order: int
    deriv: int
    h: float
    rational_weights: tuple
    weights: np.ndarray

    @property
    def trim(self) -> int:
        """Nodes lost at each end of the axis the stencil is applied along."""
        return self.order // 2

    @property
    def noise_amplification(self) -> float:
        return float(sum(abs(r) for r in self.rational_weights)) / self.h**self.deriv


def lagrange_stencil(order: int, deriv: int, h: float) -> Stencil:
    """Build the central stencil of even order n for the deriv-th derivative."""
    _validate_order(order)
    if not 1 <= deriv <= min(MAX_DERIV, order):
        raise ValueError(
            f"derivative order must be in [1, {min(MAX_DERIV, order)}] for order {order}, got {deriv}"
        )
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"spacing must be positive and finite, got {h}")
    return _build_stencil(order, deriv, h)


def _build_stencil(order: int, deriv: int, h: float) -> Stencil:
    rats = _rational_weights(order, deriv)
    scale = h**-deriv
    weights = np.array([float(r) * scale for r in rats])
    return Stencil(order, deriv, float(h), rats, weights)


def estimation_stencil(deriv: int, h: float) -> Stencil:
    """Smallest even-order central stencil for the deriv-th derivative.

    Bypasses the public derivative cap; used for probing high-order
    derivative magnitudes when calibrating C_u from data.
    """
    if deriv < 1:
        raise ValueError("derivative order must be >= 1")
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"spacing must be positive and finite, got {h}")
    order = deriv + (deriv % 2)
    return _build_stencil(order, deriv, h)


def noise_amplification(order: int, deriv: int, h: float) -> float:
    """sum |w_k|: uniform input perturbation epsilon becomes at most epsilon * this."""
    _validate_order(order)
    if not 0 <= deriv <= order:
        raise ValueError(f"derivative order must be in [0, {order}], got {deriv}")
    if deriv == 0:
        return 1.0
    return float(sum(abs(r) for r in _rational_weights(order, deriv))) / h**deriv


# Touchard-style factors from repeatedly differentiating u^(n+1)(xi(s)) under
# the chain rule with |xi^(r)(s)| <= c_xi: after j differentiations the worst
# coefficient sum is T_j below.
def _xi_factor(j: int, c_xi: float) -> float:
    if j == 0:
        return 1.0
    if j == 1:
        return c_xi
    if j == 2:
        return c_xi**2 + c_xi
    raise ValueError(f"xi chain factor only needed for j <= 2, got {j}")


def truncation_bound(order: int, deriv: int, h: float, constants: BoundConstants) -> float:
    """Bound for |stencil estimate - true deriv-th derivative| on noiseless samples.

    Differentiating the interpolation remainder u^(n+1)(xi(s)) * omega(s)/(n+1)!
    l times and evaluating at the center node gives a sum over how many of the
    l derivatives hit the xi-composition (j of them) versus the node polynomial
    omega.  Terms with j = l vanish because omega is zero at every node, and
    even omega-derivatives vanish at the center by symmetry.
    """
    _validate_order(order)
    if not 0 <= deriv <= MAX_DERIV:
        raise ValueError(f"derivative order must be in [0, {MAX_DERIV}], got {deriv}")
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"spacing must be positive and finite, got {h}")
    if deriv == 0:
        return 0.0
    n, l = order, deriv
    total = 0.0
    for j in range(l):
        omega_m = abs(_omega_center_derivative(n, l - j))
        if omega_m == 0:
            continue
        total += math.comb(l, j) * _xi_factor(j, constants.c_xi) * float(omega_m) * h ** (
            n + 1 - (l - j)
        )
    return constants.c_u * total / math.factorial(n + 1)


def e_fd(order: int, deriv: int, h: float, epsilon: float, constants: BoundConstants) -> float:
    """Total certified error of a stencil estimate from epsilon-perturbed samples.

    deriv = 0 is the identity (no stencil): the bound is epsilon itself.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if deriv == 0:
        return float(epsilon)
    return truncation_bound(order, deriv, h, constants) + epsilon * noise_amplification(
        order, deriv, h
    )


def e_fd_mixed(
    order: int,
    deriv_t: int,
    deriv_x: int,
    h_t: float,
    h_x: float,
    epsilon: float,
    constants: BoundConstants,
) -> float:
    """Certified error of the nested estimate: x-stencil first, then t-stencil.

    The inner pass's total error acts as the input perturbation of the outer
    pass.  constants.c_u must dominate all derivative magnitudes involved
    (both axes, orders up to n + deriv).
    """
    inner = e_fd(order, deriv_x, h_x, epsilon, constants)
    return e_fd(order, deriv_t, h_t, inner, constants)


def apply_stencil(field: Field, stencil: Stencil, axis: str) -> Field:
    """Correlate the field with the stencil along "t" (axis 0) or "x" (axis 1).

    Returns the estimate on the interior grid (stencil.trim nodes shaved off
    each end of that axis).  The stencil spacing must match the grid.
    """
    ax = {"t": 0, "x": 1, 0: 0, 1: 1}.get(axis)
    if ax is None:
        raise ValueError(f"axis must be 't' or 'x', got {axis!r}")
    step = field.grid.h_t if ax == 0 else field.grid.h_x
    if abs(step - stencil.h) > 1e-12 * max(step, stencil.h):
        raise GridMismatchError(
            f"stencil spacing {stencil.h} != grid spacing {step} on axis {axis!r}"
        )
    npts = field.grid.shape[ax]
    if npts < stencil.order + 1:
        raise ValueError(
            f"axis {axis!r} has {npts} nodes, stencil needs {stencil.order + 1}"
        )
    out = kernels.correlate_axis(field.values, stencil.weights, ax)
    trim_t = stencil.trim if ax == 0 else 0
    trim_x = stencil.trim if ax == 1 else 0
    return Field(field.grid.interior(trim_t, trim_x), out)


def differentiate(field: Field, order_t: int, order_x: int, fd_order: int) -> Field:
    """Mixed-derivative estimate via nested stencils (x first, then t)."""
    if order_t < 0 or order_x < 0:
        raise ValueError("derivative orders must be nonnegative")
    out = field
    if order_x > 0:
        out = apply_stencil(out, lagrange_stencil(fd_order, order_x, field.grid.h_x), "x")
    if order_t > 0:
        out = apply_stencil(out, lagrange_stencil(fd_order, order_t, field.grid.h_t), "t")
    return out
