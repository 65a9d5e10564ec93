"""Closed-form reference solutions with exact derivatives and ground-truth labels.

Each entry is a scalar field u(t, x) that solves a first-order-in-time PDE
du/dt = F(u, du/dx) whose uniqueness status (given the feature set (u, u_x))
is known in closed form.  The corpus is used to score the classifiers and to
cross-validate finite-difference output against exact derivatives.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

FUNCTION_IDS = (
    "lin_exp",
    "lin_cos",
    "lin_sin",
    "lin_affine_exp",
    "alg_inv",
    "alg_invsqrt",
    "ana_arccos",
    "ana_arcsin",
)

DEFAULT_A = 0.5
DEFAULT_B = 1.0


class Label(str, enum.Enum):
    """Verdict / ground-truth labels."""

    UNIQUE = "Unique"
    NON_UNIQUE = "NonUnique"
    INCONCLUSIVE = "Inconclusive"


class PdeClass(str, enum.Enum):
    """Structural class of the right-hand side F."""

    LINEAR = "linear"
    ALGEBRAIC = "algebraic"
    ANALYTIC = "analytic"


class DomainError(ValueError):
    """A sample point lies outside the admissible domain of a function."""


class UnsupportedOrderError(ValueError):
    """Requested derivative order is not supported."""


class UnsupportedFeatureSpecError(ValueError):
    """Ground truth is only modeled for the (u, u_x) feature set."""


@dataclass(frozen=True)
class TestFunction:
    """One corpus entry: identifier, parameters, and known uniqueness status."""

    function_id: str
    a: float
    b: float
    pde_class: PdeClass
    truth: Label


_CLASS_OF = {
    "lin_exp": PdeClass.LINEAR,
    "lin_cos": PdeClass.LINEAR,
    "lin_sin": PdeClass.LINEAR,
    "lin_affine_exp": PdeClass.LINEAR,
    "alg_inv": PdeClass.ALGEBRAIC,
    "alg_invsqrt": PdeClass.ALGEBRAIC,
    "ana_arccos": PdeClass.ANALYTIC,
    "ana_arcsin": PdeClass.ANALYTIC,
}

_TRUTH_OF = {
    "lin_exp": Label.NON_UNIQUE,
    "lin_cos": Label.UNIQUE,
    "lin_sin": Label.UNIQUE,
    "lin_affine_exp": Label.UNIQUE,
    "alg_inv": Label.NON_UNIQUE,
    "alg_invsqrt": Label.NON_UNIQUE,
    "ana_arccos": Label.UNIQUE,
    "ana_arcsin": Label.UNIQUE,
}


def get_function(function_id: str, a: float = DEFAULT_A, b: float = DEFAULT_B) -> TestFunction:
    """Look up a corpus entry by id, with solution parameters a and b."""
    if function_id not in _CLASS_OF:
        raise KeyError(f"unknown function id {function_id!r}; known: {', '.join(FUNCTION_IDS)}")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("parameters a, b must be finite")
    if function_id.startswith("ana_") and a <= 0:
        raise ValueError(f"{function_id} requires a > 0 (got a={a})")
    return TestFunction(function_id, float(a), float(b), _CLASS_OF[function_id], _TRUTH_OF[function_id])


# ---------------------------------------------------------------------------
# admissible domains

def admissible(fn: TestFunction, t: ArrayLike, x: ArrayLike) -> Union[bool, np.ndarray]:
    """True where (t, x) lies inside the open admissible domain of fn."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if fn.function_id.startswith("alg_"):
        ok = x + t > 0
    elif fn.function_id.startswith("ana_"):
        ok = fn.a * t > 0
    else:
        ok = np.ones(np.broadcast(t, x).shape, dtype=bool)
    if ok.ndim == 0:
        return bool(ok)
    return ok


def _check_domain(fn: TestFunction, t: np.ndarray, x: np.ndarray) -> None:
    ok = np.asarray(admissible(fn, t, x))
    if not ok.all():
        bad = np.argwhere(~np.broadcast_to(ok, np.broadcast(t, x).shape))
        tb = np.broadcast_to(t, np.broadcast(t, x).shape)
        xb = np.broadcast_to(x, np.broadcast(t, x).shape)
        i = tuple(bad[0])
        raise DomainError(
            f"{fn.function_id}: point (t={tb[i]!r}, x={xb[i]!r}) outside admissible domain"
        )


# ---------------------------------------------------------------------------
# sech/tanh polynomial calculus for the ana_* pair
#
# theta(z) = arccos(sech z) has theta'(z) = sech z for z > 0.  Writing
# s = sech z, tau = tanh z gives s' = -s tau and tau' = s^2, so every
# derivative of theta is an integer-coefficient polynomial in (s, tau):
# theta^(m)(z) = P_m(s, tau) with P_1 = s and P_{m+1} = D P_m where
# D(s^i tau^j) = -i s^i tau^(j+1) + j s^(i+2) tau^(j-1).

_theta_polys: list[dict[tuple[int, int], int]] = [{}, {(1, 0): 1}]


def _theta_poly(order: int) -> dict[tuple[int, int], int]:
    while len(_theta_polys) <= order:
        prev = _theta_polys[-1]
        nxt: dict[tuple[int, int], int] = {}
        for (i, j), c in prev.items():
            if i:
                nxt[(i, j + 1)] = nxt.get((i, j + 1), 0) - i * c
            if j:
                nxt[(i + 2, j - 1)] = nxt.get((i + 2, j - 1), 0) + j * c
        _theta_polys.append({k: v for k, v in nxt.items() if v})
    return _theta_polys[order]


def _theta_deriv(order: int, z: np.ndarray) -> np.ndarray:
    """m-th derivative of arccos(sech z) for z > 0, exact polynomial form."""
    if order == 0:
        return np.arccos(1.0 / np.cosh(z))
    s = 1.0 / np.cosh(z)
    tau = np.tanh(z)
    out = np.zeros_like(s)
    for (i, j), c in _theta_poly(order).items():
        out += c * s**i * tau**j
    return out


def _theta_coeff_sum(order: int) -> float:
    """sum of |coefficients| of P_order; bounds |theta^(m)| since |s|,|tau| <= 1."""
    if order == 0:
        return math.pi / 2
    return float(sum(abs(c) for c in _theta_poly(order).values()))


# ---------------------------------------------------------------------------
# evaluation and exact derivatives

def evaluate(fn: TestFunction, t: ArrayLike, x: ArrayLike) -> ArrayLike:
    """Evaluate u(t, x).  Scalars in, scalar out; arrays broadcast."""
    return exact_derivative(fn, 0, 0, t, x)


def exact_derivative(
    fn: TestFunction, order_t: int, order_x: int, t: ArrayLike, x: ArrayLike
) -> ArrayLike:
    """Closed-form d^(i+j) u / dt^i dx^j at (t, x) for any nonnegative orders."""
    if order_t < 0 or order_x < 0:
        raise UnsupportedOrderError(f"negative derivative order ({order_t}, {order_x})")
    scalar = np.isscalar(t) and np.isscalar(x)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    _check_domain(fn, t, x)
    shape = np.broadcast(t, x).shape
    out = np.asarray(_DERIV_IMPL[fn.function_id](fn, order_t, order_x, t, x), dtype=float)
    if scalar:
        return float(out)
    if out.shape != shape:
        out = np.broadcast_to(out, shape).copy()
    return out


def _d_lin_exp(fn, i, j, t, x):
    a = fn.a
    return a**j * np.exp(a * x + t)


def _d_lin_cos(fn, i, j, t, x):
    a = fn.a
    return (-a) ** i * np.cos(x - a * t + (i + j) * math.pi / 2)


def _d_lin_sin(fn, i, j, t, x):
    a = fn.a
    return (-a) ** i * np.sin(x - a * t + (i + j) * math.pi / 2)


def _d_lin_affine_exp(fn, i, j, t, x):
    # u = (x + b t) e^(a t); x-derivatives beyond the first vanish
    a, b = fn.a, fn.b
    if j == 0:
        lead = a**i * (x + b * t)
        corr = i * a ** (i - 1) * b if i > 0 else 0.0
        return (lead + corr) * np.exp(a * t)
    if j == 1:
        return a**i * np.exp(a * t) * np.ones_like(x)
    return np.zeros(np.broadcast(t, x).shape)


def _d_alg_inv(fn, i, j, t, x):
    m = i + j
    return (-1.0) ** m * math.factorial(m) * (x + t) ** (-(m + 1))


def _d_alg_invsqrt(fn, i, j, t, x):
    m = i + j
    coef = 1.0
    for r in range(m):
        coef *= -0.5 - r
    return coef * (x + t) ** (-0.5 - m)


def _d_ana_common(fn, i, j, t, x, sign):
    # u = (x + t) * g(a t) with g = arccos(sech) or arcsin(sech);
    # arcsin(sech z) = pi/2 - arccos(sech z), so derivatives differ by sign only
    a = fn.a
    z = a * t
    if j == 0:
        if i == 0:
            base = _theta_deriv(0, z)
            g0 = base if sign > 0 else math.pi / 2 - base
            return (x + t) * g0
        gi = sign * a**i * _theta_deriv(i, z)
        gim1 = sign * a ** (i - 1) * _theta_deriv(i - 1, z) if i >= 2 else (
            _theta_deriv(0, z) if sign > 0 else math.pi / 2 - _theta_deriv(0, z)
        )
        return (x + t) * gi + i * gim1
    if j == 1:
        if i == 0:
            base = _theta_deriv(0, z)
            g0 = base if sign > 0 else math.pi / 2 - base
            return g0 * np.ones_like(x)
        return sign * a**i * _theta_deriv(i, z) * np.ones_like(x)
    return np.zeros(np.broadcast(t, x).shape)


def _d_ana_arccos(fn, i, j, t, x):
    return _d_ana_common(fn, i, j, t, x, +1)


def _d_ana_arcsin(fn, i, j, t, x):
    return _d_ana_common(fn, i, j, t, x, -1)


_DERIV_IMPL = {
    "lin_exp": _d_lin_exp,
    "lin_cos": _d_lin_cos,
    "lin_sin": _d_lin_sin,
    "lin_affine_exp": _d_lin_affine_exp,
    "alg_inv": _d_alg_inv,
    "alg_invsqrt": _d_alg_invsqrt,
    "ana_arccos": _d_ana_arccos,
    "ana_arcsin": _d_ana_arcsin,
}


# ---------------------------------------------------------------------------
# certified sup bounds, used as trustworthy C_u values in bound-validity tests

def derivative_sup_bound(
    fn: TestFunction,
    order_t: int,
    order_x: int,
    t_range: tuple[float, float],
    x_range: tuple[float, float],
) -> float:
    """Upper bound for sup |d^(i+j) u / dt^i dx^j| over a closed rectangle.

    The bound is certified (never below the true sup) but not always tight.
    """
    if order_t < 0 or order_x < 0:
        raise UnsupportedOrderError(f"negative derivative order ({order_t}, {order_x})")
    t0, t1 = map(float, t_range)
    x0, x1 = map(float, x_range)
    if not (t0 <= t1 and x0 <= x1):
        raise ValueError("empty rectangle")
    i, j, a, b = order_t, order_x, fn.a, fn.b
    fid = fn.function_id

    if fid == "lin_exp":
        return abs(a) ** j * math.exp(max(a * x0, a * x1) + t1)
    if fid in ("lin_cos", "lin_sin"):
        return abs(a) ** i
    if fid == "lin_affine_exp":
        if j >= 2:
            return 0.0
        env = math.exp(max(a * t0, a * t1))
        if j == 1:
            return abs(a) ** i * env
        span = max(abs(x0 + b * t0), abs(x0 + b * t1), abs(x1 + b * t0), abs(x1 + b * t1))
        corr = i * abs(a) ** (i - 1) * abs(b) if i > 0 else 0.0
        return (abs(a) ** i * span + corr) * env
    if fid in ("alg_inv", "alg_invsqrt"):
        base = x0 + t0
        if base <= 0:
            raise DomainError(f"{fid}: rectangle touches x + t <= 0")
        m = i + j
        if fid == "alg_inv":
            return math.factorial(m) * base ** (-(m + 1))
        coef = 1.0
        for r in range(m):
            coef *= 0.5 + r
        return coef * base ** (-0.5 - m)
    if fid in ("ana_arccos", "ana_arcsin"):
        if a * t0 <= 0:
            raise DomainError(f"{fid}: rectangle touches a*t <= 0")
        if j >= 2:
            return 0.0
        bound_i = a**i * _theta_coeff_sum(i)
        if j == 1:
            return bound_i
        bound_im1 = a ** (i - 1) * _theta_coeff_sum(i - 1) if i > 0 else 0.0
        return (x1 + t1) * bound_i + i * bound_im1
    raise KeyError(fid)


def ground_truth(fn: TestFunction, feature_spec) -> Label:
    """Uniqueness label of fn for the modeled feature set (u, u_x).

    Accepts a FeatureSpec or a plain tuple of feature names.
    """
    names = tuple(feature_spec.names) if hasattr(feature_spec, "names") else tuple(feature_spec)
    if names != ("u", "u_x"):
        raise UnsupportedFeatureSpecError(
            f"ground truth is modeled only for features ('u', 'u_x'), got {names!r}"
        )
    return fn.truth
