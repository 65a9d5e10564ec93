"""Uniqueness classifiers on top of certified budgets and threshold tests.

Two decision procedures share the same contract: they only ever certify a
label when the observed singular-value ratio clears a threshold whose
validity is itself guaranteed by the perturbation budget.  Everything else
is Inconclusive, never a guess.

* rank test on the stacked feature matrix ("franco"): one global ratio;
* per-point rank test on the feature-map gradient ("jrc"): an existence
  witness certifies Unique; rank deficiency certified at every point gives
  NonUnique for algebraic right-hand sides and is only advisory for
  analytic ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import findiff, kernels, specmat, svdcore
from .features import DEFAULT_FEATURES, FeatureSpec
from .findiff import BoundConstants
from .funclib import Label, PdeClass
from .grid import Field, representation_floor
from .specmat import FeatureMatrix, JacobianStack, effective_epsilon
from .svdcore import SvResult

FLAG_TNU_INVALID = "threshold-nonunique-invalid"
FLAG_TU_INVALID = "threshold-unique-invalid"
FLAG_CONTRADICTION = "contradictory-thresholds"
FLAG_ANALYTIC_ONE_DIRECTION = "analytic-one-direction"
FLAG_ZERO_JACOBIAN_SKIPPED = "zero-jacobian-points-skipped"
FLAG_ALL_ZERO_JACOBIAN = "all-points-zero-jacobian"
FLAG_CU_OVERRIDE = "cu-override"


class GridTooSmallError(ValueError):
    """Not enough nodes to calibrate smoothness constants from data."""


@dataclass(frozen=True)
class ConstantPolicy:
    """Knobs converting an observed spectrum into threshold constants.

    c: fraction of the top singular value treated as numerically zero.
    c1_low_factor / c1_up_factor: bracket around the observed top value.
    cn_floor_factor: fraction of the observed smallest value entering the
    rank-deficiency level (the level is max(c * s1, cn_floor_factor * sn)).
    """

    c: float = 1e-4
    c1_low_factor: float = 0.5
    c1_up_factor: float = 1.5
    cn_floor_factor: float = 0.5
    c_xi: float = 1.0
    c_u_override: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.c < 1:
            raise ValueError("c must be in (0, 1)")
        if not (0 < self.c1_low_factor <= 1 <= self.c1_up_factor):
            raise ValueError("need c1_low_factor <= 1 <= c1_up_factor, both positive")
        if not 0 < self.cn_floor_factor <= 1:
            raise ValueError("cn_floor_factor must be in (0, 1]")
        if self.c_xi < 0 or not math.isfinite(self.c_xi):
            raise ValueError("c_xi must be finite and nonnegative")
        if self.c_u_override is not None and not (
            self.c_u_override >= 0 and math.isfinite(self.c_u_override)
        ):
            raise ValueError("c_u_override must be finite and nonnegative")


DEFAULT_POLICY = ConstantPolicy()


@dataclass(frozen=True)
class DerivedConstants:
    """Calibrated constants: smoothness (c_u, c_xi) plus spectrum brackets.

    The spectrum brackets are None for per-point procedures, which derive
    them from each point's own spectrum using the policy factors.
    """

    policy: ConstantPolicy
    bound_constants: BoundConstants
    c_u_source: str  # "estimated" or "override"
    flags: tuple[str, ...]
    c1_low: Optional[float] = None
    c1_up: Optional[float] = None
    c_n: Optional[float] = None


@dataclass(frozen=True)
class Verdict:
    """Classifier outcome with the evidence that produced it.

    rho_values holds the observed ratio(s): a single entry for the global
    test, one entry per interior point for the per-point test (NaN where a
    zero gradient made the ratio undefined).  t_nonunique / t_unique are the
    thresholds at the deciding point; None marks an invalid threshold.
    witnesses lists deciding point indices (all existence witnesses for
    Unique, the tightest point for universally-quantified outcomes).
    """

    label: Label
    method: str
    rho_values: tuple[float, ...]
    t_nonunique: Optional[float]
    t_unique: Optional[float]
    witnesses: tuple[int, ...]
    flags: tuple[str, ...]
    eps: float
    sigma_max: float
    sigma_min: float
    constants: DerivedConstants
    n_points: int = 1
    n_skipped: int = 0

    @property
    def rho_max(self) -> Optional[float]:
        vals = [r for r in self.rho_values if not math.isnan(r)]
        return max(vals) if vals else None

    @property
    def rho_min(self) -> Optional[float]:
        vals = [r for r in self.rho_values if not math.isnan(r)]
        return min(vals) if vals else None


def required_axis_order(spec: FeatureSpec, for_jacobian: bool) -> int:
    """Largest single-axis derivative order any stencil pass will need."""
    orders = [0]
    for f in spec.features:
        if f.kind != "u":
            continue
        if for_jacobian:
            orders.extend((f.order_t + 1, f.order_x, f.order_t, f.order_x + 1))
        else:
            orders.extend((f.order_t, f.order_x))
    return max(orders)


def estimate_c_u(field: Field, fd_order: int, max_deriv: int) -> float:
    """Calibrate the high-derivative magnitude bound from the data itself.

    For each axis and each k = 1..max_deriv, estimate the (fd_order + k)-th
    derivative with the smallest even-order stencil and take the largest
    magnitude seen.  Raises GridTooSmallError when any probe does not fit.
    """
    if max_deriv < 1:
        return 0.0
    best = 0.0
    g = field.grid
    for axis, h, npts in (("t", g.h_t, g.n_t), ("x", g.h_x, g.n_x)):
        for k in range(1, max_deriv + 1):
            st = findiff.estimation_stencil(fd_order + k, h)
            if npts < st.order + 1:
                raise GridTooSmallError(
                    f"axis {axis!r} has {npts} nodes; probing the order-{fd_order + k} "
                    f"derivative needs {st.order + 1}"
                )
            est = findiff.apply_stencil(field, st, axis)
            best = max(best, float(np.max(np.abs(est.values))))
    return best


def derive_constants(
    field: Field,
    spec: FeatureSpec,
    fd_order: int,
    sv_preview: Optional[SvResult],
    policy: ConstantPolicy = DEFAULT_POLICY,
    for_jacobian: bool = False,
    bound_constants: Optional[BoundConstants] = None,
) -> DerivedConstants:
    """Assemble all constants the threshold tests need.

    sv_preview supplies the observed spectrum for the global brackets; pass
    None for per-point procedures.  bound_constants short-circuits the c_u
    calibration when the caller already did it.
    """
    flags: list[str] = []
    if bound_constants is not None:
        bc = bound_constants
        source = "provided"
    elif policy.c_u_override is not None:
        bc = BoundConstants(policy.c_u_override, policy.c_xi)
        source = "override"
        flags.append(FLAG_CU_OVERRIDE)
    else:
        max_deriv = required_axis_order(spec, for_jacobian)
        c_u = estimate_c_u(field, fd_order, max_deriv)
        bc = BoundConstants(c_u, policy.c_xi)
        source = "estimated"
    c1_low = c1_up = c_n = None
    if sv_preview is not None:
        s1 = float(sv_preview.sigmas[0])
        sn = float(sv_preview.sigmas[-1])
        c1_low = policy.c1_low_factor * s1
        c1_up = policy.c1_up_factor * s1
        c_n = max(policy.c * s1, policy.cn_floor_factor * sn)
    return DerivedConstants(policy, bc, source, tuple(flags), c1_low, c1_up, c_n)


def resolve_bound_constants(
    field: Field, spec: FeatureSpec, fd_order: int, policy: ConstantPolicy, for_jacobian: bool
) -> tuple[BoundConstants, str, tuple[str, ...]]:
    """c_u calibration step shared by the pipelines; falls back to the override."""
    if policy.c_u_override is not None:
        return BoundConstants(policy.c_u_override, policy.c_xi), "override", (FLAG_CU_OVERRIDE,)
    max_deriv = required_axis_order(spec, for_jacobian)
    c_u = estimate_c_u(field, fd_order, max_deriv)
    return BoundConstants(c_u, policy.c_xi), "estimated", ()


def nr_franco(
    fm: FeatureMatrix, constants: DerivedConstants, sv: Optional[SvResult] = None
) -> Verdict:
    """Global rank test on the stacked feature matrix."""
    if constants.c1_low is None or constants.c1_up is None or constants.c_n is None:
        raise ValueError("global spectrum brackets missing; derive_constants needs sv_preview")
    if sv is None:
        sv = svdcore.singular_values(fm.values)
    eps = effective_epsilon(fm.eps_g, "G")
    t_nu = svdcore.nonunique_threshold(eps, constants.c1_low)
    t_u = svdcore.unique_threshold(eps, constants.c_n, constants.c1_up)
    r = sv.rho
    flags = list(constants.flags)
    if t_nu is None:
        flags.append(FLAG_TNU_INVALID)
    if t_u is None:
        flags.append(FLAG_TU_INVALID)
    unique_fire = t_nu is not None and r > t_nu
    nonunique_fire = t_u is not None and r < t_u
    if unique_fire and nonunique_fire:
        label = Label.INCONCLUSIVE
        flags.append(FLAG_CONTRADICTION)
    elif unique_fire:
        label = Label.UNIQUE
    elif nonunique_fire:
        label = Label.NON_UNIQUE
    else:
        label = Label.INCONCLUSIVE
    return Verdict(
        label=label,
        method="franco",
        rho_values=(r,),
        t_nonunique=t_nu,
        t_unique=t_u,
        witnesses=(),
        flags=tuple(flags),
        eps=eps,
        sigma_max=float(sv.sigmas[0]),
        sigma_min=float(sv.sigmas[-1]),
        constants=constants,
        n_points=1,
        n_skipped=0,
    )


def nr_jrc(js: JacobianStack, constants: DerivedConstants, pde_class: PdeClass) -> Verdict:
    """Per-point rank test on the feature-map gradient stack."""
    if pde_class not in (PdeClass.ALGEBRAIC, PdeClass.ANALYTIC):
        raise ValueError(
            f"per-point gradient test applies to algebraic or analytic classes, got {pde_class}"
        )
    eps = effective_epsilon(js.eps_jg, "J_G")
    pol = constants.policy
    sv = np.asarray(kernels.two_column_singular_values(js.matrices))
    s1 = sv[:, 0]
    s2 = sv[:, 1]
    nonzero = s1 > 0.0
    n_points = s1.size
    n_skipped = int(np.count_nonzero(~nonzero))
    flags = list(constants.flags)

    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(nonzero, s2 / np.where(nonzero, s1, 1.0), np.nan)
        c1_low = pol.c1_low_factor * s1
        c1_up = pol.c1_up_factor * s1
        c_n = np.maximum(pol.c * s1, pol.cn_floor_factor * s2)
        tnu_valid = nonzero & (c1_low - eps > 0)
        tu_valid = nonzero & (c_n - eps > 0)
        t_nu = np.where(tnu_valid, eps / np.where(tnu_valid, c1_low - eps, 1.0), np.nan)
        t_u = np.where(tu_valid, (c_n - eps) / (c1_up + eps), np.nan)

    if n_skipped == n_points:
        flags.append(FLAG_ALL_ZERO_JACOBIAN)
        return Verdict(
            label=Label.INCONCLUSIVE,
            method="jrc",
            rho_values=tuple(rho.tolist()),
            t_nonunique=None,
            t_unique=None,
            witnesses=(),
            flags=tuple(flags),
            eps=eps,
            sigma_max=0.0,
            sigma_min=0.0,
            constants=constants,
            n_points=n_points,
            n_skipped=n_skipped,
        )
    if n_skipped:
        flags.append(FLAG_ZERO_JACOBIAN_SKIPPED)
    if not tnu_valid.any():
        flags.append(FLAG_TNU_INVALID)
    if not tu_valid.all():
        flags.append(FLAG_TU_INVALID)

    unique_mask = tnu_valid & (rho > t_nu)
    below_mask = tu_valid & (rho < t_u)
    exists_unique = bool(unique_mask.any())
    all_below = bool(below_mask.all())

    witnesses: tuple[int, ...] = ()
    deciding: Optional[int] = None
    if exists_unique and all_below:
        label = Label.INCONCLUSIVE
        flags.append(FLAG_CONTRADICTION)
        deciding = int(np.nanargmax(np.where(unique_mask, rho - t_nu, -np.inf)))
    elif exists_unique:
        label = Label.UNIQUE
        witnesses = tuple(np.flatnonzero(unique_mask).tolist())
        deciding = int(np.nanargmax(np.where(unique_mask, rho - t_nu, -np.inf)))
    elif all_below:
        deciding = int(np.nanargmin(np.where(below_mask, t_u - rho, np.inf)))
        witnesses = (deciding,)
        if pde_class is PdeClass.ALGEBRAIC:
            label = Label.NON_UNIQUE
        else:
            label = Label.INCONCLUSIVE
            flags.append(FLAG_ANALYTIC_ONE_DIRECTION)
    else:
        label = Label.INCONCLUSIVE
        if nonzero.any():
            deciding = int(np.nanargmax(np.where(nonzero, rho, -np.inf)))

    def _opt(arr: np.ndarray, idx: Optional[int]) -> Optional[float]:
        if idx is None:
            return None
        v = float(arr[idx])
        return None if math.isnan(v) else v

    return Verdict(
        label=label,
        method="jrc",
        rho_values=tuple(rho.tolist()),
        t_nonunique=_opt(t_nu, deciding),
        t_unique=_opt(t_u, deciding),
        witnesses=witnesses,
        flags=tuple(flags),
        eps=eps,
        sigma_max=float(s1.max()),
        sigma_min=float(s2[nonzero].min()) if nonzero.any() else 0.0,
        constants=constants,
        n_points=n_points,
        n_skipped=n_skipped,
    )


def analyze(
    noisy: Field,
    *,
    method: str,
    pde_class: Optional[PdeClass] = None,
    spec: FeatureSpec = DEFAULT_FEATURES,
    fd_order: int = 8,
    noise_epsilon: float = 0.0,
    policy: ConstantPolicy = DEFAULT_POLICY,
) -> Verdict:
    """Full pipeline: budgets, matrices, constants, verdict.

    noise_epsilon is the certified uniform bound on the sampling noise; the
    float64 representation floor of the stored values is always added on
    top so downstream bounds stay honest on exact data.
    """
    if method not in ("franco", "jrc"):
        raise ValueError(f"method must be 'franco' or 'jrc', got {method!r}")
    if noise_epsilon < 0 or not math.isfinite(noise_epsilon):
        raise ValueError("noise_epsilon must be finite and nonnegative")
    eps_input = noise_epsilon + representation_floor(noisy.values)
    for_jac = method == "jrc"
    bc, source, cu_flags = resolve_bound_constants(noisy, spec, fd_order, policy, for_jac)
    if method == "franco":
        fm = specmat.build_feature_matrix(noisy, spec, fd_order, eps_input, bc)
        sv = svdcore.singular_values(fm.values)
        constants = derive_constants(
            noisy, spec, fd_order, sv, policy, for_jacobian=False, bound_constants=bc
        )
        constants = replace(constants, c_u_source=source, flags=cu_flags)
        return nr_franco(fm, constants, sv)
    if pde_class is None:
        raise ValueError("per-point gradient test needs pde_class")
    js = specmat.build_jacobian_stack(noisy, spec, fd_order, eps_input, bc)
    constants = DerivedConstants(policy, bc, source, cu_flags)
    return nr_jrc(js, constants, pde_class)
