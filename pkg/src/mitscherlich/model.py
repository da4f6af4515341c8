"""The Mitscherlich mean function ``mu(x) = b1 + b2 * x**b3`` and its designs.

Besides the native power form this module converts the three exponential
forms found in the literature (Box-Lucas, Han-Chaloner, Dette et al.) to the
native one through the stimulus maps ``x = exp(z)`` or ``x = exp(-z)``.

Convention: ``0**b3 * log(0) == 0`` for ``b3 > 0`` (the limit), so designs
with a zero stimulus are handled without special cases downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from mitscherlich.errors import DomainError, OrderError, PrecisionError, RangeError


@dataclass(frozen=True)
class ModelParams:
    """Parameters (b1, b2, b3) of the Mitscherlich function.

    Native parameters need ``b1 >= 0`` and ``b2, b3 > 0``.  ``mirrored``
    marks the Box-Lucas variant with both ``b2`` and ``b3`` negative; it is
    produced by :func:`to_native` only and does not admit ``x = 0``.
    """

    beta1: float
    beta2: float
    beta3: float
    mirrored: bool = False

    def __post_init__(self):
        b1, b2, b3 = (float(v) for v in (self.beta1, self.beta2, self.beta3))
        if not all(math.isfinite(v) for v in (b1, b2, b3)):
            raise ValueError("parameters must be finite")
        if self.mirrored:
            if not (b2 < 0 and b3 < 0):
                raise ValueError("mirrored parameters need beta2 < 0 and beta3 < 0")
        else:
            if b2 <= 0 or b3 <= 0:
                raise ValueError("beta2 and beta3 must be positive")
            if b1 < 0:
                raise ValueError("beta1 must be non-negative")
        object.__setattr__(self, "beta1", b1)
        object.__setattr__(self, "beta2", b2)
        object.__setattr__(self, "beta3", b3)

    @classmethod
    def of(cls, values: Sequence[float]) -> ModelParams:
        b1, b2, b3 = values
        return cls(b1, b2, b3)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.beta1, self.beta2, self.beta3)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())


@dataclass(frozen=True)
class Bounds:
    """Stimulus window ``[lower, upper]`` with ``0 <= lower < upper < inf``."""

    lower: float
    upper: float

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("bounds must be finite")
        if lo < 0:
            raise ValueError("lower bound must be non-negative")
        if not lo < hi:
            raise ValueError(f"lower bound {lo} must be below upper bound {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class Design:
    """Three strictly increasing stimuli with replicate counts.

    ``det`` is the attained information determinant when known.
    """

    x: tuple[float, float, float]
    n: tuple[int, int, int] = (1, 1, 1)
    det: float | None = field(default=None, compare=False)

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        n = tuple(int(v) for v in self.n)
        if len(x) != 3 or len(n) != 3:
            raise ValueError("a design has exactly three support points")
        check_increasing(x)
        if any(v < 1 or v != w for v, w in zip(n, self.n)):
            raise ValueError("replicate counts must be positive integers")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "n", n)

    def within(self, bounds: Bounds, tol: float = 0.0) -> bool:
        return bounds.lower - tol <= self.x[0] and self.x[2] <= bounds.upper + tol

    def with_det(self, det: float) -> Design:
        return Design(self.x, self.n, det)

    def with_counts(self, n: Sequence[int]) -> Design:
        return Design(self.x, tuple(n), None)


def check_increasing(x: Sequence[float]) -> None:
    if any(not b > a for a, b in zip(x, x[1:])):
        raise OrderError(f"stimuli must be strictly increasing, got {tuple(x)}")


def _power_and_xlog(params: ModelParams, x: ArrayLike):
    """Return ``x**b3`` and ``x**b3 * log(x)`` with the zero-stimulus limit."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(np.isnan(xa)):
        raise DomainError("stimuli must be non-negative")
    zero = xa == 0
    if params.mirrored and np.any(zero):
        raise DomainError("the mirrored parametrization is undefined at x = 0")
    safe = np.where(zero, 1.0, xa)
    with np.errstate(over="ignore"):
        p = np.where(zero, 0.0, safe**params.beta3)
        q = np.where(zero, 0.0, p * np.log(safe))
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
        raise RangeError("overflow evaluating x**beta3")
    return p, q


def mean(params: ModelParams, x: ArrayLike):
    """``b1 + b2 * x**b3``; exactly ``b1`` at ``x = 0``."""
    p, _ = _power_and_xlog(params, x)
    mu = params.beta1 + params.beta2 * p
    return float(mu) if mu.ndim == 0 else mu


def mean_gradient(params: ModelParams, x: ArrayLike) -> np.ndarray:
    """Partial derivatives ``(1, x**b3, b2 x**b3 log x)``.

    Shape ``(3,)`` for scalar ``x``, ``(len(x), 3)`` otherwise.
    """
    p, q = _power_and_xlog(params, x)
    return np.stack([np.ones_like(p), p, params.beta2 * q], axis=-1)


def design_matrix(params: ModelParams, x: Sequence[float]) -> np.ndarray:
    """3x3 linearised design matrix, one gradient row per stimulus."""
    x = tuple(float(v) for v in x)
    if len(x) != 3:
        raise ValueError("need exactly three stimuli")
    check_increasing(x)
    return mean_gradient(params, np.array(x))


# ---------------------------------------------------------------------------
# Literature parametrizations
# ---------------------------------------------------------------------------

class Form(str, Enum):
    NATIVE = "native"            # b1 + b2 x^b3
    BOX_LUCAS = "box-lucas"      # b1 - b2 exp(-b3 z), b2, b3 > 0
    HAN_CHALONER = "han-chaloner"  # b1 + b2 exp(-b3 z), b2, b3 > 0
    DETTE = "dette"              # b1 + b2 exp(z / b3~), b2, b3~ > 0


@dataclass(frozen=True)
class Parametrization:
    """A mean-function form with its own parameter triple.

    For ``Form.DETTE`` the third parameter is the reciprocal power b3~.
    """

    form: Form
    beta1: float
    beta2: float
    beta3: float

    def __post_init__(self):
        object.__setattr__(self, "form", Form(self.form))
        if self.form is not Form.NATIVE and (self.beta2 <= 0 or self.beta3 <= 0):
            raise ValueError("literature forms need positive second and third parameters")

    def mean_z(self, z: ArrayLike):
        """Mean in the form's own stimulus coordinate."""
        z = np.asarray(z, dtype=float)
        b1, b2, b3 = self.beta1, self.beta2, self.beta3
        if self.form is Form.NATIVE:
            return b1 + b2 * z**b3
        if self.form is Form.BOX_LUCAS:
            return b1 - b2 * np.exp(-b3 * z)
        if self.form is Form.HAN_CHALONER:
            return b1 + b2 * np.exp(-b3 * z)
        return b1 + b2 * np.exp(z / b3)

    def native_params(self) -> ModelParams:
        b1, b2, b3 = self.beta1, self.beta2, self.beta3
        if self.form in (Form.NATIVE, Form.HAN_CHALONER):
            return ModelParams(b1, b2, b3)
        if self.form is Form.BOX_LUCAS:
            return ModelParams(b1, -b2, -b3, mirrored=True)
        return ModelParams(b1, b2, 1.0 / b3)

    @property
    def reverses_order(self) -> bool:
        return self.form is Form.HAN_CHALONER

    def to_x(self, z: ArrayLike) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.form is Form.NATIVE:
            return z
        if self.form is Form.HAN_CHALONER:
            return np.exp(-z)
        return np.exp(z)

    def to_z(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.form is Form.NATIVE:
            return x
        if self.form is Form.HAN_CHALONER:
            return -np.log(x)
        return np.log(x)


def to_native(p: Parametrization, z_design: Sequence[float]):
    """Map a z-design to native parameters and increasing x-stimuli.

    Returns ``(params, x, reversed)`` where ``reversed`` says the stimulus
    order flipped (only for the decreasing map ``x = exp(-z)``).
    """
    z = tuple(float(v) for v in z_design)
    check_increasing(z)
    x = p.to_x(np.array(z))
    if p.reverses_order:
        x = x[::-1]
    return p.native_params(), tuple(float(v) for v in x), p.reverses_order


def from_native_stimuli(p: Parametrization, x: Sequence[float]) -> tuple[float, ...]:
    """Inverse stimulus map, returned in increasing z order."""
    z = p.to_z(np.asarray(x, dtype=float))
    return tuple(float(v) for v in np.sort(z))


def _log_x2_homoscedastic(b3: float, log_lo: float, log_hi: float) -> float:
    """log of the homoscedastic optimal middle stimulus, computed in log space.

    Equals ``[U^b log U - L^b log L] / [U^b - L^b] - 1/b`` with
    ``L = exp(log_lo)``, ``U = exp(log_hi)``; stable for either sign of b.
    """
    if not log_hi - log_lo > 1e-10 * max(1.0, abs(log_lo), abs(log_hi)):
        raise PrecisionError("outer stimuli coincide; middle stimulus undefined")
    a_lo, a_hi = b3 * log_lo, b3 * log_hi
    shift = max(a_lo, a_hi)
    w_lo, w_hi = math.exp(a_lo - shift), math.exp(a_hi - shift)
    denom = w_hi - w_lo
    if denom == 0.0:
        raise PrecisionError("zero denominator in middle-stimulus formula")
    return (w_hi * log_hi - w_lo * log_lo) / denom - 1.0 / b3


def z2_optimal_dette(beta3_tilde: float, z1: float, z3: float) -> float:
    """Optimal middle z-stimulus for ``b1 + b2 exp(z / b3~)`` (normal errors)."""
    if beta3_tilde <= 0:
        raise ValueError("beta3_tilde must be positive")
    if not z1 < z3:
        raise PrecisionError(f"need z1 < z3, got {z1}, {z3}")
    return _log_x2_homoscedastic(1.0 / beta3_tilde, z1, z3)


def z2_optimal(p: Parametrization, z_min: float, z_max: float) -> float:
    """Optimal middle z-stimulus for any form under homoscedastic normal errors.

    The outer z-stimuli are the window ends; which end maps to ``x1`` depends
    on the direction of the stimulus map.
    """
    if not z_min < z_max:
        raise PrecisionError(f"need z_min < z_max, got {z_min}, {z_max}")
    b3 = p.native_params().beta3
    if p.form is Form.NATIVE:
        if z_min < 0:
            raise DomainError("native stimuli must be non-negative")
        if z_min == 0:
            return z_max * math.exp(-1.0 / b3)
        return math.exp(_log_x2_homoscedastic(b3, math.log(z_min), math.log(z_max)))
    if p.form is Form.HAN_CHALONER:
        return -_log_x2_homoscedastic(b3, -z_max, -z_min)
    return _log_x2_homoscedastic(b3, z_min, z_max)
