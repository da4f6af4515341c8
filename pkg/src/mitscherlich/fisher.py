"""Fisher information for three-point Mitscherlich designs.

The homoscedastic exponential-family information is
``sum_i n_i g'(mu_i) grad_i grad_i^T`` (dispersion factored out, a(phi) = 1),
whose determinant has the closed form

    b2^2 * M(x)^2 * prod_i n_i g'(mu_i)
    M(x) = (x1 x2)^b3 log(x2/x1) - (x1 x3)^b3 log(x3/x1) + (x2 x3)^b3 log(x3/x2)

The heteroscedastic normal model ``y ~ N(mu, sigma2 * phi(mu))`` has the same
structure with ``g'`` replaced by ``h(mu) = 0.5 (phi'/phi)^2 + 1/(sigma2 phi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from mitscherlich.errors import DomainError
from mitscherlich.family import LinkLike, _out
from mitscherlich.model import Design, ModelParams, design_matrix, mean, mean_gradient


def det3(m: np.ndarray):
    """Determinant of a 3x3 matrix (or a stack of them) by cofactor expansion."""
    m = np.asarray(m)
    if m.dtype != np.longdouble:
        m = m.astype(float)
    d = (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )
    return float(d) if d.ndim == 0 else d


def _pair_term(a: np.ndarray, b: np.ndarray, b3: float) -> np.ndarray:
    """``(a b)^b3 log(b / a)``, zero when ``a == 0`` or ``a == b``."""
    zero = (a == 0) | (a == b)
    a_safe = np.where(zero, 1.0, a)
    b_safe = np.where(zero, 1.0, b)
    with np.errstate(over="ignore"):
        ratio = b_safe / a_safe
    # log(b / a) is the accurate form for close stimuli; a subnormal a overflows it
    log_ratio = np.where(np.isfinite(ratio), np.log(np.where(np.isfinite(ratio), ratio, 1.0)),
                         np.log(b_safe) - np.log(a_safe))
    return np.where(zero, 0.0, (a_safe * b_safe) ** b3 * log_ratio)


def bracket(params: ModelParams, x1: ArrayLike, x2: ArrayLike, x3: ArrayLike):
    """The stimulus factor M(x) of the determinant (limit value at x1 = 0)."""
    x1, x2, x3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, x3)))
    if np.any(x1 < 0):
        raise DomainError("stimuli must be non-negative")
    b3 = params.beta3
    m = _pair_term(x1, x2, b3) - _pair_term(x1, x3, b3) + _pair_term(x2, x3, b3)
    return _out(m)


def _weights(family: LinkLike, params: ModelParams, x: ArrayLike):
    mu = mean(params, x)
    family.check_mean(mu)
    g1, _ = family.link_derivatives(mu)
    return np.asarray(g1, dtype=float)


def info_matrix(family: LinkLike, params: ModelParams, design: Design) -> np.ndarray:
    """``sum_i n_i w(mu_i) grad_i grad_i^T`` with ``w = g'`` (or ``h``)."""
    x = np.array(design.x)
    w = _weights(family, params, x) * np.array(design.n, dtype=float)
    grad = mean_gradient(params, x)
    return (grad * w[:, None]).T @ grad


def _gradient_extended(params: ModelParams, x: np.ndarray) -> np.ndarray:
    xl = x.astype(np.longdouble)
    b2, b3 = np.longdouble(params.beta2), np.longdouble(params.beta3)
    pos = xl > 0
    safe = np.where(pos, xl, np.longdouble(1))
    p = np.where(pos, safe**b3, np.longdouble(0))
    q = np.where(pos, p * np.log(safe), np.longdouble(0))
    return np.stack([np.ones_like(p), p, b2 * q], axis=-1)


def info_det(family: LinkLike, params: ModelParams, design: Design) -> float:
    """Determinant of :func:`info_matrix` with the matrix built in extended precision.

    The gradient rows, the weighted sum and the cofactor expansion all use
    ``np.longdouble``.  In double precision, information matrices of closely
    spaced designs or small ``b3`` (condition numbers near 1e7) lose about
    nine digits of their determinant.
    """
    x = np.array(design.x)
    w = (_weights(family, params, x) * np.array(design.n, dtype=float)).astype(np.longdouble)
    grad = _gradient_extended(params, x)
    m = np.zeros((3, 3), dtype=np.longdouble)
    for gi, wi in zip(grad, w):
        m += wi * np.outer(gi, gi)
    return float(det3(m))


def det_criterion(family: LinkLike, params: ModelParams, x1, x2, x3,
                  n: tuple[int, int, int] = (1, 1, 1)):
    """Vectorised closed-form determinant over arrays of stimuli.

    Coinciding stimuli give exactly zero.  Raises :class:`DomainError` if any
    mean leaves the family's domain.
    """
    x1, x2, x3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, x3)))
    m = np.asarray(bracket(params, x1, x2, x3))
    w = np.ones_like(m)
    for xi, ni in zip((x1, x2, x3), n):
        w = w * (ni * _weights(family, params, xi))
    return _out(params.beta2**2 * m**2 * w)


def det_explicit(family: LinkLike, params: ModelParams, design: Design) -> float:
    """Closed-form information determinant for a three-point design."""
    x1, x2, x3 = design.x
    return float(det_criterion(family, params, x1, x2, x3, design.n))


def weighted_lsq_det(family: LinkLike, params: ModelParams, design: Design) -> float:
    """``|X^T W X|`` with the linearised design matrix and ``W = diag(n_i g'(mu_i))``.

    X is square, so this is ``|X|^2 prod(w)``; forming ``X^T W X`` first
    would square the condition number of closely spaced designs.
    """
    x = design_matrix(params, design.x)
    w = _weights(family, params, np.array(design.x)) * np.array(design.n, dtype=float)
    return float(det3(x) ** 2 * np.prod(w))


# ---------------------------------------------------------------------------
# Heteroscedastic normal responses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeteroSpec:
    """``y ~ N(mu, sigma2 * phi(mu))`` with known ``sigma2``.

    Build with :meth:`power_law` (``phi = mu**p``) or :meth:`constant`; a
    custom ``phi`` needs its first derivative, and its second derivative if
    the placement conditions are to be checked.
    """

    sigma2: float
    variance_fn: Callable[[np.ndarray], np.ndarray] | None = None
    variance_deriv: Callable[[np.ndarray], np.ndarray] | None = None
    variance_deriv2: Callable[[np.ndarray], np.ndarray] | None = None
    power: float | None = None

    def __post_init__(self):
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValueError("sigma2 must be positive and finite")
        if self.power is not None and not self.power > 0:
            raise ValueError("power must be positive")
        if self.power is None and (self.variance_fn is None) != (self.variance_deriv is None):
            raise ValueError("a custom variance function needs its derivative")

    @classmethod
    def power_law(cls, p: float, sigma2: float = 1.0) -> HeteroSpec:
        return cls(sigma2=sigma2, power=p)

    @classmethod
    def constant(cls, sigma2: float = 1.0) -> HeteroSpec:
        return cls(sigma2=sigma2)

    @property
    def name(self) -> str:
        if self.power is not None:
            return f"normal(phi=mu^{self.power:g}, sigma2={self.sigma2:g})"
        if self.variance_fn is None:
            return f"normal(sigma2={self.sigma2:g})"
        return f"normal(custom phi, sigma2={self.sigma2:g})"

    @property
    def mean_domain(self) -> tuple[float, float]:
        if self.power is not None:
            return (0.0, math.inf)
        return (-math.inf, math.inf)

    def check_mean(self, mu: ArrayLike) -> None:
        lo, hi = self.mean_domain
        m = np.asarray(mu, dtype=float)
        if not np.all((m > lo) & (m < hi)):
            raise DomainError(f"mean outside ({lo}, {hi}) for {self.name}")

    def phi(self, mu: ArrayLike) -> np.ndarray:
        m = np.asarray(mu, dtype=float)
        if self.power is not None:
            return m**self.power
        if self.variance_fn is None:
            return np.ones_like(m)
        return np.asarray(self.variance_fn(m), dtype=float)

    def dphi(self, mu: ArrayLike) -> np.ndarray:
        m = np.asarray(mu, dtype=float)
        if self.power is not None:
            return self.power * m ** (self.power - 1)
        if self.variance_fn is None:
            return np.zeros_like(m)
        return np.asarray(self.variance_deriv(m), dtype=float)

    def d2phi(self, mu: ArrayLike) -> np.ndarray:
        m = np.asarray(mu, dtype=float)
        if self.power is not None:
            p = self.power
            return p * (p - 1) * m ** (p - 2)
        if self.variance_fn is None:
            return np.zeros_like(m)
        if self.variance_deriv2 is None:
            raise ValueError("second derivative of phi not supplied")
        return np.asarray(self.variance_deriv2(m), dtype=float)

    def h(self, mu: ArrayLike):
        """Information weight ``0.5 (phi'/phi)^2 + 1/(sigma2 phi)``."""
        self.check_mean(mu)
        m = np.asarray(mu, dtype=float)
        if self.power is not None:
            p = self.power
            val = 0.5 * p**2 * m**-2.0 + m**-p / self.sigma2
        else:
            phi = self.phi(m)
            val = 0.5 * (self.dphi(m) / phi) ** 2 + 1.0 / (self.sigma2 * phi)
        return _out(val)

    def h_prime(self, mu: ArrayLike):
        self.check_mean(mu)
        m = np.asarray(mu, dtype=float)
        if self.power is not None:
            p = self.power
            val = -p * (p * m**-3.0 + m ** (-p - 1) / self.sigma2)
        else:
            phi, d1, d2 = self.phi(m), self.dphi(m), self.d2phi(m)
            r = d1 / phi
            val = r * (d2 / phi - r**2) - d1 / (self.sigma2 * phi**2)
        return _out(val)

    def link_derivatives(self, mu: ArrayLike):
        """``(h, h')`` so the spec can stand in for a family in the solver."""
        return self.h(mu), self.h_prime(mu)


def hetero_h(spec: HeteroSpec, mu: ArrayLike):
    return spec.h(mu)


def hetero_info_matrix(spec: HeteroSpec, params: ModelParams, design: Design) -> np.ndarray:
    return info_matrix(spec, params, design)


@dataclass(frozen=True)
class ScoreCovariances:
    """Covariances of the beta scores and the dispersion score.

    ``var_phi`` is ``None`` where it is not computed (generic families).
    """

    var_beta: np.ndarray
    var_phi: float | None
    cov_beta_phi: np.ndarray

    def full_matrix(self) -> np.ndarray:
        if self.var_phi is None:
            raise ValueError("dispersion score variance not available")
        out = np.zeros((4, 4))
        out[:3, :3] = self.var_beta
        out[:3, 3] = out[3, :3] = self.cov_beta_phi
        out[3, 3] = self.var_phi
        return out


def score_covariances(family: LinkLike, params: ModelParams, design: Design) -> ScoreCovariances:
    """Homoscedastic case: the beta scores are orthogonal to the dispersion score."""
    return ScoreCovariances(info_matrix(family, params, design), None, np.zeros(3))


def hetero_score_covariances(spec: HeteroSpec, params: ModelParams,
                             design: Design) -> ScoreCovariances:
    """Score covariances for ``(b1, b2, b3, sigma2)`` under the normal model."""
    x = np.array(design.x)
    n = np.array(design.n, dtype=float)
    mu = mean(params, x)
    spec.check_mean(mu)
    grad = mean_gradient(params, x)
    ratio = spec.dphi(mu) / spec.phi(mu)
    var_phi = n.sum() / (2.0 * spec.sigma2**2)
    cov = (n * ratio) @ grad / (2.0 * spec.sigma2)
    return ScoreCovariances(hetero_info_matrix(spec, params, design), float(var_phi), cov)
