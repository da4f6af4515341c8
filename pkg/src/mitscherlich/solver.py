"""Locally D-optimal three-point designs.

Placement rules, applied to the link derivatives over the mean range of the
window ``[L, U]``:

* ``g' >= 0`` and ``g'' <= 0``  ->  ``x1 = L``
* additionally ``mu g'' + 2 g' >= 0``  ->  ``x3 = U``
* with both ends fixed, ``x2`` is the root of the stationarity equation
  :func:`x2_equation` on ``(x1, x2_upper]`` where ``x2_upper`` is the
  bound of :func:`x2_upper_bound`.

When the third sign condition fails (inverse Gaussian, power variance with
``p > 2``) the solver searches ``(x2, x3)`` on a grid with ``x1 = L``; when
the second fails (Binomial with means above N/2, exponential transforms) it
searches all three stimuli and flags the result as grid-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import brentq, minimize_scalar

from mitscherlich import grid
from mitscherlich.errors import (
    ConvergenceError,
    DomainError,
    InfeasibleError,
    UnsupportedError,
)
from mitscherlich.family import ConditionReport, Family, Kind, LinkLike, theorem_conditions
from mitscherlich.fisher import HeteroSpec, bracket, det_criterion, det_explicit
from mitscherlich.model import Bounds, Design, ModelParams, _log_x2_homoscedastic, mean

DEFAULT_GRID_STEP = 0.01
CONDITION_POINTS = 101
# full 3-D grids are only affordable at a coarse spacing; zoom from there
_COARSE_3D_CELLS = 250_000


class Method(str, Enum):
    CLOSED_FORM = "closed-form"
    ROOT_FIND = "root-find"
    GRID_1D = "grid-1d"
    GRID_2D = "grid-2d"
    GRID_3D = "grid-3d"


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a design computation.

    ``conditions`` aggregates the sign conditions over the whole mean range;
    ``conditions_lower``/``conditions_upper`` are evaluated at mu(L), mu(U).
    ``x2_interval`` is the interval x2 is known to lie in.  ``theorems_apply``
    is false when the design rests on a grid search alone.  For grid methods
    ``grid_design`` is the raw optimum on the ``grid_step`` lattice, before
    refinement.
    """

    design: Design
    method: Method
    family: str
    conditions: ConditionReport
    conditions_lower: ConditionReport
    conditions_upper: ConditionReport
    x2_interval: tuple[float, float]
    theorems_apply: bool = True
    iterations: int | None = None
    grid_step: float | None = None
    grid_design: Design | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def x(self) -> tuple[float, float, float]:
        return self.design.x

    @property
    def det(self) -> float:
        return self.design.det


# ---------------------------------------------------------------------------
# Stationarity equation for the middle stimulus
# ---------------------------------------------------------------------------

def _xpow_log_ratio(a: float, b: float, b3: float) -> float:
    """``a**b3 * log(b / a)`` with the ``a = 0`` limit."""
    if a == 0:
        return 0.0
    ratio = b / a
    return a**b3 * (math.log(ratio) if math.isfinite(ratio) else math.log(b) - math.log(a))


def x2_equation_terms(family: LinkLike, params: ModelParams, x1: float, x3: float,
                      x2: float) -> tuple[float, float]:
    """The curvature and slope terms of the x2 equation, separately."""
    if not x1 < x2 < x3:
        raise DomainError(f"need x1 < x2 < x3, got {x1}, {x2}, {x3}")
    b2, b3 = params.beta2, params.beta3
    mu2 = mean(params, x2)
    g1, g2 = family.link_derivatives(mu2)
    m = float(bracket(params, x1, x2, x3))
    slope = (b3 * _xpow_log_ratio(x1, x2, b3) + b3 * x3**b3 * math.log(x3 / x2)
             + x1**b3 - x3**b3)
    return b2 * b3 * g2 * m, 2.0 * g1 * slope


def x2_equation(family: LinkLike, params: ModelParams, x1: float, x3: float,
                x2: float, *, curvature_sign: float = 1.0) -> float:
    """Left-hand side of the stationarity equation in x2.

    Positive just above ``x1``; its root in ``(x1, x2_upper_bound]`` maximises
    the determinant for fixed outer stimuli.  ``curvature_sign`` exists only
    as a fault-injection hook for negative-control tests.
    """
    curv, slope = x2_equation_terms(family, params, x1, x3, x2)
    return curvature_sign * curv + slope


def x2_upper_bound(params: ModelParams, x1: float, x3: float) -> float:
    """Largest admissible optimal x2 given the outer stimuli.

    ``x3 * exp(-1/b3)`` when ``x1 = 0``.
    """
    b3 = params.beta3
    if x1 == 0:
        return x3 * math.exp(-1.0 / b3)
    return math.exp(_log_x2_homoscedastic(b3, math.log(x1), math.log(x3)))


def gaussian_x2_closed_form(params: ModelParams, bounds: Bounds) -> float:
    """Optimal middle stimulus under the identity link (depends on b3 only)."""
    return x2_upper_bound(params, bounds.lower, bounds.upper)


def poisson_x2_bounds(params: ModelParams, upper: float) -> tuple[float, float]:
    """Interval holding the log-link optimal x2 when ``L = 0``."""
    b3 = params.beta3
    return (upper * math.exp(-2.0 / b3), upper * math.exp(-1.0 / b3))


def _bracketed_root(f: Callable[[float], float], lo: float, hi: float,
                    scale_at_hi: float) -> tuple[float, int]:
    f_lo, f_hi = f(lo), f(hi)
    if f_hi >= 0:
        # the equation is <= 0 at the bound in exact arithmetic; zero means
        # the curvature term vanishes (identity link) and the bound is the root
        if f_hi <= 1e-9 * scale_at_hi:
            return hi, 0
        raise ConvergenceError(
            f"stationarity equation positive at the x2 upper bound ({f_hi:.3g}); "
            "the link conditions are violated"
        )
    if not f_lo > 0:
        raise ConvergenceError(f"stationarity equation not positive near x1 ({f_lo:.3g})")
    root, info = brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps,
                        maxiter=200, full_output=True)
    if not info.converged:
        raise ConvergenceError(f"root finding stopped after {info.iterations} iterations")
    return root, info.iterations


# ---------------------------------------------------------------------------
# Window checks
# ---------------------------------------------------------------------------

def _mean_range(family: LinkLike, params: ModelParams, bounds: Bounds) -> np.ndarray:
    """Means on a uniform grid over ``[mu(L), mu(U)]``, validated."""
    mu_lo, mu_hi = mean(params, bounds.lower), mean(params, bounds.upper)
    mus = np.linspace(mu_lo, mu_hi, CONDITION_POINTS)
    lo_dom, _ = family.mean_domain
    if mu_lo <= lo_dom:
        if mu_lo == lo_dom == 0 and getattr(family, "zero_mean_limit", False):
            mus = mus[1:]
        elif mu_lo == 0 and bounds.lower == 0 and params.beta1 == 0:
            raise InfeasibleError(
                f"{family.name} needs beta1 > 0 when the window starts at x = 0 "
                "(a zero mean is outside the response range)"
            )
    try:
        family.check_mean(mus)
    except DomainError as exc:
        raise InfeasibleError(f"window [{bounds.lower}, {bounds.upper}] invalid: {exc}") from None
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        g1, g2 = family.link_derivatives(mus)
    if not (np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))):
        raise InfeasibleError(
            f"link derivatives overflow for means near {mus[0]:.3g}; "
            "use beta1 = 0 for a zero mean at the lower end"
        )
    return mus


def check_conditions(family: LinkLike, params: ModelParams,
                     bounds: Bounds) -> tuple[ConditionReport, ConditionReport, ConditionReport]:
    """Sign conditions over the mean range, at its low end and at its high end."""
    mus = _mean_range(family, params, bounds)
    return (theorem_conditions(family, mus), theorem_conditions(family, mus[0]),
            theorem_conditions(family, mus[-1]))


def _attained_det(family: LinkLike, params: ModelParams, design: Design) -> float:
    mus = mean(params, np.array(design.x))
    lo, _ = family.mean_domain
    if mus[0] == lo == 0 and getattr(family, "zero_mean_limit", False):
        # a count response with mean zero is degenerate: unbounded information
        return math.inf
    return det_explicit(family, params, design)


def _check_window_width(bounds: Bounds, grid_step: float) -> None:
    if bounds.width < 10 * grid_step:
        raise InfeasibleError(
            f"window width {bounds.width} is below ten grid steps ({grid_step})"
        )


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def _root_design(family: LinkLike, params: ModelParams, bounds: Bounds,
                 equation: Callable[[float], float] | None = None,
                 curvature_sign: float = 1.0) -> tuple[float, tuple[float, float], int]:
    x1, x3 = bounds.lower, bounds.upper
    upper = x2_upper_bound(params, x1, x3)
    lo = x1 + 1e-9 * bounds.width
    if equation is None:
        def equation(x2: float) -> float:
            return x2_equation(family, params, x1, x3, x2, curvature_sign=curvature_sign)
        # the slope term vanishes at the bound for the identity link, so
        # measure the residual against the size of its pieces
        g1, _ = family.link_derivatives(mean(params, upper))
        scale = max(*(abs(t) for t in x2_equation_terms(family, params, x1, x3, upper)),
                    2.0 * abs(g1) * x3**params.beta3)
    else:
        scale = max(1.0, abs(equation(upper)))
    x2, iters = _bracketed_root(equation, lo, upper, scale)
    return x2, (x1, upper), iters


def _grid_criterion(family: LinkLike, params: ModelParams):
    def f(x1, x2, x3):
        return det_criterion(family, params, x1, x2, x3)
    return f


def _search_2d(family: LinkLike, params: ModelParams, bounds: Bounds,
               grid_step: float):
    """Returns the step-``grid_step`` optimum, the refined optimum and the pass count."""
    crit = _grid_criterion(family, params)
    fixed = (bounds.lower, None, None)
    coarse = grid.search_axes(crit, grid.full_axes(bounds, grid_step, fixed))
    res, passes = grid.climb(crit, bounds, fixed, coarse.x, grid_step, grid_step / 100)
    return coarse.x, res.x, passes + 1


def _search_3d(family: LinkLike, params: ModelParams, bounds: Bounds,
               grid_step: float) -> tuple[tuple[float, float, float], int]:
    crit = _grid_criterion(family, params)
    coarse = grid.coarse_step_for(bounds, grid_step, 3, _COARSE_3D_CELLS)
    res, passes = grid.zoom(crit, bounds, (None, None, None), coarse, grid_step / 100)
    return res.x, passes


def solve(family: LinkLike, params: ModelParams, bounds: Bounds,
          n: tuple[int, int, int] = (1, 1, 1), *, grid_step: float = DEFAULT_GRID_STEP,
          closed_form: bool = True, allow_grid: bool = True,
          curvature_sign: float = 1.0) -> SolveReport:
    """Compute the locally D-optimal three-point design on ``bounds``.

    Replicate counts ``n`` only scale the determinant, so the stimuli are
    found with unit counts and ``n`` is attached afterwards.
    """
    _check_window_width(bounds, grid_step)
    overall, at_lo, at_hi = check_conditions(family, params, bounds)
    L, U = bounds.lower, bounds.upper
    common = dict(family=family.name, conditions=overall, conditions_lower=at_lo,
                  conditions_upper=at_hi)

    def finish(x, method, interval, **kw) -> SolveReport:
        design = Design(tuple(x), n)
        design = design.with_det(_attained_det(family, params, design))
        return SolveReport(design=design, method=method, x2_interval=interval, **common, **kw)

    is_identity = isinstance(family, Family) and family.kind is Kind.GAUSSIAN
    if is_identity and closed_form:
        x2 = gaussian_x2_closed_form(params, bounds)
        return finish((L, x2, U), Method.CLOSED_FORM, (L, x2))

    if overall.upper_at_bound:
        x2, interval, iters = _root_design(family, params, bounds,
                                           curvature_sign=curvature_sign)
        return finish((L, x2, U), Method.ROOT_FIND, interval, iterations=iters)

    if not allow_grid:
        raise UnsupportedError(
            f"placement conditions fail for {family.name} on [{L}, {U}] "
            f"({overall.as_dict()}) and grid fallback is disabled"
        )

    if overall.lower_at_bound:
        if isinstance(family, Family) and family.kind is Kind.INVERSE_GAUSSIAN and L == 0:
            return invgauss_solve(params, bounds, grid_step, n=n)
        coarse, x, passes = _search_2d(family, params, bounds, grid_step)
        return finish(x, Method.GRID_2D, (L, U), iterations=passes, grid_step=grid_step,
                      grid_design=Design(coarse, n).with_det(
                          _attained_det(family, params, Design(coarse, n))),
                      notes=("x3 placed by grid search: mu g'' + 2 g' < 0 somewhere",))

    x, passes = _search_3d(family, params, bounds, grid_step)
    return finish(x, Method.GRID_3D, (L, U), theorems_apply=False, iterations=passes,
                  grid_step=grid_step,
                  notes=("g'' > 0 somewhere on the mean range: design is a grid optimum only",))


# ---------------------------------------------------------------------------
# Inverse Gaussian with L = 0
# ---------------------------------------------------------------------------

def invgauss_det(params: ModelParams, x2: ArrayLike, x3: ArrayLike,
                 n: tuple[int, int, int] = (1, 1, 1)):
    """Inverse-Gaussian determinant with ``x1 = 0`` (vectorised)."""
    b1, b2, b3 = params.as_tuple()
    x2, x3 = np.broadcast_arrays(np.asarray(x2, dtype=float), np.asarray(x3, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(x2 == x3, 0.0, (x2 * x3) ** b3 * np.log(x3 / x2))
    val = (n[0] * n[1] * n[2] * b1**-3 * b2**2 * m**2
           * (b1 + b2 * x2**b3) ** -3 * (b1 + b2 * x3**b3) ** -3)
    return float(val) if val.ndim == 0 else val


def invgauss_x2_equation(params: ModelParams, x3: float, x2: float) -> float:
    """Stationarity equation in x2 for the inverse Gaussian with ``x1 = 0``."""
    b1, b2, b3 = params.as_tuple()
    p = b2 * x2**b3
    return b3 * (p - 2 * b1) * math.log(x3 / x2) + 2 * (b1 + p)


def invgauss_x2_cap(params: ModelParams) -> float:
    """``(2 b1 / b2)**(1/b3)``: the optimal x2 lies strictly below this."""
    return (2 * params.beta1 / params.beta2) ** (1.0 / params.beta3)


def _invgauss_x2_given_x3(params: ModelParams, x3: float, cap: float) -> tuple[float, int]:
    """Bisect the x2 equation at fixed x3.

    The equation is negative as x2 -> 0 and positive at
    ``min(cap, x3 exp(-1/b3))``, so the bracket always holds.
    """
    hi = min(cap, x2_upper_bound(params, 0.0, x3))
    lo = 1e-12 * x3
    x2, info = brentq(lambda v: invgauss_x2_equation(params, x3, v), lo, hi,
                      xtol=1e-14, rtol=4 * np.finfo(float).eps, full_output=True)
    return x2, info.iterations


def invgauss_solve(params: ModelParams, bounds: Bounds, grid_step: float = DEFAULT_GRID_STEP,
                   n: tuple[int, int, int] = (1, 1, 1), *, profile: bool = False) -> SolveReport:
    """Grid search over (x2, x3) with x1 = 0, then x2 from its equation.

    The x2 axis of the grid is cut at :func:`invgauss_x2_cap`.  The raw grid
    optimum is kept as ``grid_design``; the reported design keeps the grid x3
    and replaces x2 by the exact root of the x2 equation at that x3.

    With ``profile=True`` x3 is also refined, by maximising the determinant
    over x3 with x2 tied to its root.  The determinant is flat along a ridge
    there, so x3 can move by a few grid steps while the determinant changes
    only in the fifth digit.
    """
    if bounds.lower != 0:
        raise InfeasibleError("the inverse-Gaussian grid search assumes L = 0")
    if params.beta1 <= 0:
        raise InfeasibleError("inverse Gaussian with x1 = 0 requires beta1 > 0")
    _check_window_width(bounds, grid_step)
    fam = Family(Kind.INVERSE_GAUSSIAN)
    overall, at_lo, at_hi = check_conditions(fam, params, bounds)
    cap = invgauss_x2_cap(params)
    U = bounds.upper

    def crit(x1, x2, x3):
        return np.where(x2 < cap, invgauss_det(params, x2, x3), -np.inf)

    fixed = (0.0, None, None)
    axes = grid.full_axes(bounds, grid_step, fixed)
    axes[1] = axes[1][axes[1] < cap]
    res = grid.search_axes(crit, axes)
    grid_design = Design(res.x, n)
    grid_design = grid_design.with_det(det_explicit(fam, params, grid_design))

    x3 = res.x[2]
    notes = ["x3 from grid search; x2 from the stationarity equation at x3"]
    if profile:
        lo3 = max(x3 - 50 * grid_step, min(cap, x3))
        hi3 = min(U, x3 + 50 * grid_step)

        def neg_log_profile(v: float) -> float:
            x2, _ = _invgauss_x2_given_x3(params, v, cap)
            return -math.log(invgauss_det(params, x2, v))

        opt = minimize_scalar(neg_log_profile, bounds=(lo3, hi3), method="bounded",
                              options={"xatol": 1e-10})
        x3 = float(opt.x)
        # the bounded search never evaluates its endpoints; the edge at U may win
        if hi3 == U and neg_log_profile(U) <= opt.fun:
            x3 = U
        notes = ["x3 refined by profile maximisation; x2 from the stationarity equation"]
    x2, iters = _invgauss_x2_given_x3(params, x3, cap)
    design = Design((0.0, x2, x3), n)
    design = design.with_det(det_explicit(fam, params, design))
    if design.det < grid_design.det:
        design = grid_design
    return SolveReport(design=design, method=Method.GRID_2D, family=fam.name,
                       conditions=overall, conditions_lower=at_lo, conditions_upper=at_hi,
                       x2_interval=(0.0, cap), iterations=iters, grid_step=grid_step,
                       grid_design=grid_design, notes=tuple(notes))


# ---------------------------------------------------------------------------
# Heteroscedastic normal
# ---------------------------------------------------------------------------

def hetero_x2_equation(spec: HeteroSpec, params: ModelParams, x3: float, x2: float) -> float:
    """Power-variance stationarity equation for x2 with ``x1 = 0``, as LHS - RHS."""
    if spec.power is None:
        raise ValueError("the closed equation needs a power variance function")
    p, s2 = spec.power, spec.sigma2
    b1, b3 = params.beta1, params.beta3
    mu2 = mean(params, x2)
    lhs = b3 * ((2 - p) / (s2 * mu2**p) + p * b1 / (s2 * mu2 ** (p + 1))
                + p**2 * b1 / mu2**3) * math.log(x3 / x2)
    rhs = p**2 / mu2**2 + 2 / (s2 * mu2**p)
    return lhs - rhs


def hetero_solve(spec: HeteroSpec, params: ModelParams, bounds: Bounds,
                 n: tuple[int, int, int] = (1, 1, 1), *,
                 grid_step: float = DEFAULT_GRID_STEP) -> SolveReport:
    """Design for ``y ~ N(mu, sigma2 mu**p)``.

    For ``0 < p <= 2`` and ``L = 0`` the middle stimulus solves the closed
    power-variance equation; otherwise the general solver runs on the
    weight ``h``.
    """
    if spec.power is None or bounds.lower != 0 or spec.power > 2:
        return solve(spec, params, bounds, n, grid_step=grid_step)
    _check_window_width(bounds, grid_step)
    overall, at_lo, at_hi = check_conditions(spec, params, bounds)
    U = bounds.upper
    # positive near 0 (the log term dominates) and negative at the bound
    x2, interval, iters = _root_design(
        spec, params, bounds, equation=lambda v: hetero_x2_equation(spec, params, U, v))
    design = Design((0.0, x2, U), n)
    design = design.with_det(det_explicit(spec, params, design))
    return SolveReport(design=design, method=Method.ROOT_FIND, family=spec.name,
                       conditions=overall, conditions_lower=at_lo, conditions_upper=at_hi,
                       x2_interval=interval, iterations=iters)


# ---------------------------------------------------------------------------
# Transformed means psi(b1 + b2 x^b3)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransformSpec:
    """A transformation psi of the mean with its first two derivatives."""

    name: str
    psi: Callable[[np.ndarray], np.ndarray]
    dpsi: Callable[[np.ndarray], np.ndarray]
    d2psi: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float] = (-math.inf, math.inf)

    @classmethod
    def from_name(cls, name: str) -> TransformSpec:
        try:
            return BUILTIN_TRANSFORMS[name]
        except KeyError:
            raise ValueError(
                f"unknown transform {name!r} (expected one of {sorted(BUILTIN_TRANSFORMS)})"
            ) from None


IDENTITY = TransformSpec("id", lambda m: m, np.ones_like, np.zeros_like)
SQRT = TransformSpec("sqrt", np.sqrt, lambda m: 0.5 * m**-0.5, lambda m: -0.25 * m**-1.5,
                     (0.0, math.inf))
EXP = TransformSpec("exp", np.exp, np.exp, np.exp)
BUILTIN_TRANSFORMS = {t.name: t for t in (IDENTITY, SQRT, EXP)}


@dataclass(frozen=True)
class TransformedFamily:
    """Family seen through ``E(y) = psi(mu)``.

    Its weight is ``g'(psi(mu)) psi'(mu)^2`` and the derivative of that weight
    is ``g''(psi) psi'^3 + 2 g'(psi) psi'' psi'``.
    """

    family: Family
    transform: TransformSpec

    @property
    def name(self) -> str:
        return f"{self.family.name}[{self.transform.name}]"

    @property
    def mean_domain(self) -> tuple[float, float]:
        return self.transform.domain

    def check_mean(self, mu: ArrayLike) -> None:
        lo, hi = self.transform.domain
        m = np.asarray(mu, dtype=float)
        if not np.all((m > lo) & (m < hi)):
            raise DomainError(f"mean outside the domain of transform {self.transform.name}")
        self.family.check_mean(self.transform.psi(m))

    def link_derivatives(self, mu: ArrayLike):
        self.check_mean(mu)
        m = np.asarray(mu, dtype=float)
        t = self.transform
        psi, d1, d2 = t.psi(m), t.dpsi(m), t.d2psi(m)
        g1, g2 = self.family.link_derivatives(psi)
        w1 = g1 * d1**2
        w2 = g2 * d1**3 + 2 * g1 * d2 * d1
        return (float(w1), float(w2)) if np.ndim(w1) == 0 else (w1, w2)


def sqrt_log_x2_equation(params: ModelParams, bounds: Bounds, x2: float) -> float:
    """Closed x2 equation for a square-root mean under the log link (x1 = L, x3 = U)."""
    b2, b3 = params.beta2, params.beta3
    L, U = bounds.lower, bounds.upper
    m = float(bracket(params, L, x2, U))
    slope = (b3 * _xpow_log_ratio(L, x2, b3) + b3 * U**b3 * math.log(U / x2)
             + L**b3 - U**b3)
    return -0.75 * b2 * b3 * m + mean(params, x2) * slope


def transformed_solve(family: Family, psi: TransformSpec, params: ModelParams,
                      bounds: Bounds, n: tuple[int, int, int] = (1, 1, 1), *,
                      grid_step: float = DEFAULT_GRID_STEP,
                      allow_grid: bool = True) -> SolveReport:
    """Design for the mean ``psi(b1 + b2 x**b3)`` under ``family``'s link."""
    if psi.name == "id":
        return solve(family, params, bounds, n, grid_step=grid_step, allow_grid=allow_grid)
    tf = TransformedFamily(family, psi)
    log_link = family.kind in (Kind.POISSON, Kind.NEGATIVE_BINOMIAL)
    if psi.name == "sqrt" and log_link:
        _check_window_width(bounds, grid_step)
        overall, at_lo, at_hi = check_conditions(tf, params, bounds)
        if overall.upper_at_bound:
            x2, interval, iters = _root_design(
                tf, params, bounds, equation=lambda v: sqrt_log_x2_equation(params, bounds, v))
            design = Design((bounds.lower, x2, bounds.upper), n)
            design = design.with_det(_attained_det(tf, params, design))
            return SolveReport(design=design, method=Method.ROOT_FIND, family=tf.name,
                               conditions=overall, conditions_lower=at_lo,
                               conditions_upper=at_hi, x2_interval=interval,
                               iterations=iters)
    return solve(tf, params, bounds, n, grid_step=grid_step, allow_grid=allow_grid)


# ---------------------------------------------------------------------------
# Oracle and efficiency
# ---------------------------------------------------------------------------

def brute_force_oracle(criterion: grid.Criterion, bounds: Bounds,
                       grid_step: float = DEFAULT_GRID_STEP,
                       fixed: tuple[float | None, float | None, float | None] = (None, None, None),
                       max_cells: float = grid.DEFAULT_MAX_CELLS) -> Design:
    """Exhaustive maximisation of ``criterion`` over the stimulus grid.

    Coordinates given in ``fixed`` are held; the others range over the full
    grid on ``bounds``.  Raises :class:`BudgetError` above ``max_cells``.
    """
    res = grid.search_axes(criterion, grid.full_axes(bounds, grid_step, fixed), max_cells)
    return Design(res.x, det=res.value)


def determinant_criterion(family: LinkLike, params: ModelParams) -> grid.Criterion:
    """Closed-form determinant as a grid criterion (unit replicate counts)."""
    return _grid_criterion(family, params)


@dataclass(frozen=True)
class Efficiency:
    ratio: float          # |I(candidate)| / |I(optimal)|
    d_efficiency: float   # cube root of the ratio


def efficiency(family: LinkLike, params: ModelParams, candidate: Design,
               optimal: Design) -> Efficiency:
    ratio = det_explicit(family, params, candidate) / det_explicit(family, params, optimal)
    return Efficiency(ratio, ratio ** (1.0 / 3.0))


def dilution_design(upper: float, d: float, n: tuple[int, int, int] = (1, 1, 1)) -> Design:
    """Serial dilution ``(U/d^2, U/d, U)``: equidistant on the log scale."""
    if not d > 1:
        raise ValueError("dilution factor must exceed 1")
    return Design((upper / d**2, upper / d, upper), n)
