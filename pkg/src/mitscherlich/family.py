"""Exponential-family members described through their canonical links.

For design purposes a family is fully characterised by the first two
derivatives of its canonical link ``g``: the information weight of a
stimulus is ``n * g'(mu)`` and the placement rules for the outer stimuli
depend on the signs of ``g'``, ``g''`` and ``mu * g'' + 2 * g'``.

All functions accept scalars or numpy arrays; scalars come back as floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np
from numpy.typing import ArrayLike

from mitscherlich.errors import DomainError


class Kind(str, Enum):
    GAUSSIAN = "gaussian"
    POISSON = "poisson"
    NEGATIVE_BINOMIAL = "negbin"
    GAMMA = "gamma"
    BINOMIAL = "binomial"
    INVERSE_GAUSSIAN = "invgauss"


_ALIASES = {
    "normal": Kind.GAUSSIAN,
    "negative-binomial": Kind.NEGATIVE_BINOMIAL,
    "negative_binomial": Kind.NEGATIVE_BINOMIAL,
    "nb": Kind.NEGATIVE_BINOMIAL,
    "inverse-gaussian": Kind.INVERSE_GAUSSIAN,
    "inverse_gaussian": Kind.INVERSE_GAUSSIAN,
    "ig": Kind.INVERSE_GAUSSIAN,
}


class LinkLike(Protocol):
    """What the solver needs from a family: a weight and its derivative."""

    name: str

    def link_derivatives(self, mu: ArrayLike) -> tuple: ...

    def check_mean(self, mu: ArrayLike) -> None: ...

    @property
    def mean_domain(self) -> tuple[float, float]: ...


def _out(value):
    arr = np.asarray(value, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


@dataclass(frozen=True)
class ConditionReport:
    """Signs of the link derivatives used by the placement theorems.

    ``c1``: g' >= 0, ``c2``: g'' <= 0, ``c3``: mu g'' + 2 g' >= 0.
    """

    c1: bool
    c2: bool
    c3: bool

    @property
    def lower_at_bound(self) -> bool:
        """x1 belongs at the lower end of the window."""
        return self.c1 and self.c2

    @property
    def upper_at_bound(self) -> bool:
        """x3 belongs at the upper end of the window."""
        return self.c1 and self.c2 and self.c3

    def __and__(self, other: ConditionReport) -> ConditionReport:
        return ConditionReport(self.c1 and other.c1, self.c2 and other.c2,
                               self.c3 and other.c3)

    def as_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "c3": self.c3}


@dataclass(frozen=True)
class Family:
    """A canonical-link exponential family.

    ``trials`` is the Binomial trial count N and must be omitted for the
    other families.  ``dispersion_known`` only matters for reporting: the
    design criterion never depends on a(phi).
    """

    kind: Kind
    trials: int | None = None
    dispersion_known: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.BINOMIAL:
            if self.trials is None or int(self.trials) != self.trials or self.trials < 1:
                raise ValueError("Binomial family needs a positive integer trial count")
            object.__setattr__(self, "trials", int(self.trials))
        elif self.trials is not None:
            raise ValueError(f"trial count is meaningless for {self.kind.value}")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_name(cls, name: str, trials: int | None = None) -> Family:
        key = name.strip().lower()
        kind = _ALIASES.get(key)
        if kind is None:
            try:
                kind = Kind(key)
            except ValueError:
                valid = ", ".join(k.value for k in Kind)
                raise ValueError(f"unknown family {name!r} (expected one of {valid})") from None
        return cls(kind, trials if kind is Kind.BINOMIAL else None)

    @property
    def name(self) -> str:
        if self.kind is Kind.BINOMIAL:
            return f"binomial(N={self.trials})"
        return self.kind.value

    # -- domain -------------------------------------------------------------

    @property
    def mean_domain(self) -> tuple[float, float]:
        """Open interval of admissible means."""
        if self.kind is Kind.GAUSSIAN:
            return (-math.inf, math.inf)
        if self.kind is Kind.BINOMIAL:
            return (0.0, float(self.trials))
        return (0.0, math.inf)

    @property
    def zero_mean_limit(self) -> bool:
        """Whether mu -> 0 is a legitimate (degenerate) limit.

        Count responses can be identically zero, so a design point with mean
        zero carries unbounded information.  Gamma and inverse Gaussian
        responses are strictly positive, so mu = 0 is not allowed there.
        """
        return self.kind in (Kind.POISSON, Kind.NEGATIVE_BINOMIAL, Kind.BINOMIAL)

    @property
    def independence_condition(self) -> bool:
        """VAR of the dispersion score is free of beta (true for all built-ins)."""
        return True

    def contains(self, mu: ArrayLike):
        lo, hi = self.mean_domain
        m = np.asarray(mu, dtype=float)
        inside = (m > lo) & (m < hi)
        return bool(inside) if inside.ndim == 0 else inside

    def check_mean(self, mu: ArrayLike) -> None:
        if not np.all(self.contains(mu)):
            m = np.atleast_1d(np.asarray(mu, dtype=float))
            bad = m[~np.atleast_1d(self.contains(m))][0]
            lo, hi = self.mean_domain
            raise DomainError(
                f"mean {bad!r} outside the open domain ({lo}, {hi}) of {self.name}"
            )

    # -- link ---------------------------------------------------------------

    def link(self, mu: ArrayLike):
        self.check_mean(mu)
        m = np.asarray(mu, dtype=float)
        k = self.kind
        if k is Kind.GAUSSIAN:
            g = m
        elif k in (Kind.POISSON, Kind.NEGATIVE_BINOMIAL):
            g = np.log(m)
        elif k is Kind.GAMMA:
            g = -1.0 / m
        elif k is Kind.BINOMIAL:
            g = np.log(m / (self.trials - m))
        else:
            g = -0.5 / m**2
        return _out(g)

    def link_derivatives(self, mu: ArrayLike):
        """Return ``(g'(mu), g''(mu))``."""
        self.check_mean(mu)
        m = np.asarray(mu, dtype=float)
        k = self.kind
        if k is Kind.GAUSSIAN:
            g1, g2 = np.ones_like(m), np.zeros_like(m)
        elif k in (Kind.POISSON, Kind.NEGATIVE_BINOMIAL):
            g1, g2 = 1.0 / m, -1.0 / m**2
        elif k is Kind.GAMMA:
            g1, g2 = 1.0 / m**2, -2.0 / m**3
        elif k is Kind.BINOMIAL:
            n = self.trials
            g1 = n / (m * (n - m))
            g2 = -1.0 / m**2 + 1.0 / (n - m) ** 2
        else:
            g1, g2 = m**-3.0, -3.0 * m**-4.0
        return _out(g1), _out(g2)

    def cumulant(self, mu: ArrayLike):
        """``b(g(mu))``, the log-partition evaluated at the canonical parameter."""
        self.check_mean(mu)
        m = np.asarray(mu, dtype=float)
        k = self.kind
        if k is Kind.GAUSSIAN:
            b = 0.5 * m**2
        elif k in (Kind.POISSON, Kind.NEGATIVE_BINOMIAL):
            b = m
        elif k is Kind.GAMMA:
            b = np.log(m)
        elif k is Kind.BINOMIAL:
            b = -self.trials * np.log1p(-m / self.trials)
        else:
            b = -1.0 / m
        return _out(b)

    def unit_variance(self, mu: ArrayLike):
        """``b''(theta)``; the response variance is this times a(phi)."""
        g1, _ = self.link_derivatives(mu)
        return _out(1.0 / np.asarray(g1))


_COND_RTOL = 1e-12


def link_derivatives(family: LinkLike, mu: ArrayLike):
    """``(g'(mu), g''(mu))`` for any link-like object."""
    return family.link_derivatives(mu)


def theorem_conditions(family: LinkLike, mu: ArrayLike) -> ConditionReport:
    """Evaluate the three link-sign conditions at ``mu`` (all points if an array)."""
    g1, g2 = family.link_derivatives(mu)
    m = np.asarray(mu, dtype=float)
    g1 = np.asarray(g1)
    g2 = np.asarray(g2)
    # relative slack: Gamma has mu g'' + 2 g' == 0 identically, and Binomial
    # has g'' == 0 at N/2; rounding must not flip those
    tol = _COND_RTOL * (np.abs(m * g2) + 2 * np.abs(g1))
    return ConditionReport(
        c1=bool(np.all(g1 >= -tol)),
        c2=bool(np.all(np.abs(m) * g2 <= tol)),
        c3=bool(np.all(m * g2 + 2 * g1 >= -tol)),
    )


GAUSSIAN = Family(Kind.GAUSSIAN)
POISSON = Family(Kind.POISSON)
NEGATIVE_BINOMIAL = Family(Kind.NEGATIVE_BINOMIAL)
GAMMA = Family(Kind.GAMMA)
INVERSE_GAUSSIAN = Family(Kind.INVERSE_GAUSSIAN)


def binomial(trials: int) -> Family:
    return Family(Kind.BINOMIAL, trials)
