"""Monte-Carlo check of the asymptotic covariance of the MLE at a design.

Responses are simulated from each family at the three design points, the
Mitscherlich model is refitted by Fisher scoring and the empirical
covariance of the estimates is compared with the inverse information.

Random streams: replicate ``r`` at design point ``i`` draws from a Philox
generator seeded by ``SeedSequence(seed, spawn_key=(r, i))``.  A dataset is
therefore reproducible for a given seed no matter how replicates are
scheduled, and two designs simulated with the same seed share streams.

The negative binomial is fitted with the log-link (Poisson) score.  With
three parameters and three support points the model is saturated, so the
estimate interpolates the point means whichever working weights are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from mitscherlich.errors import (
    ConfigError,
    DomainError,
    NonConvergence,
    SingularInformation,
)
from mitscherlich.family import Family, Kind
from mitscherlich.model import Design, ModelParams, mean

SCHEMA = "mitscherlich.covariance-check/1"
MAX_ITER = 200
SCORE_RTOL = 1e-8
MAX_CONDITION = 1e12
_MAX_HALVINGS = 60

# default nuisance values when SimConfig.dispersion is None
DEFAULT_DISPERSION = {
    Kind.GAUSSIAN: 1.0,            # variance sigma^2
    Kind.GAMMA: 2.0,               # shape k
    Kind.NEGATIVE_BINOMIAL: 10.0,  # size r
    Kind.INVERSE_GAUSSIAN: 1.0,    # shape lambda
}


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``n_per_point`` overrides the design's replicate counts when given.
    ``dispersion`` is sigma^2 (Gaussian), the shape k (Gamma), the size r
    (negative binomial) or lambda (inverse Gaussian); Poisson and Binomial
    ignore it.
    """

    seed: int = 0
    replicates: int = 1000
    n_per_point: int | None = None
    dispersion: float | None = None

    def __post_init__(self):
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ConfigError("replicates must be a positive integer")
        if self.n_per_point is not None and (
                int(self.n_per_point) != self.n_per_point or self.n_per_point < 1):
            raise ConfigError("n_per_point must be a positive integer")
        if self.dispersion is not None and not (
                math.isfinite(self.dispersion) and self.dispersion > 0):
            raise ConfigError(f"dispersion must be positive and finite, got {self.dispersion}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")

    def dispersion_for(self, family: Family) -> float | None:
        if family.kind in (Kind.POISSON, Kind.BINOMIAL):
            return None
        return DEFAULT_DISPERSION[family.kind] if self.dispersion is None else self.dispersion

    def counts(self, design: Design) -> tuple[int, int, int]:
        if self.n_per_point is None:
            return design.n
        return (self.n_per_point,) * 3


def dispersion_scale(family: Family, dispersion: float | None) -> float:
    """a(phi): response variance divided by the unit variance.

    Not defined for the negative binomial, whose variance is not a multiple
    of the Poisson one.
    """
    k = family.kind
    if k in (Kind.POISSON, Kind.BINOMIAL):
        return 1.0
    if k is Kind.GAUSSIAN:
        return float(dispersion)
    if k in (Kind.GAMMA, Kind.INVERSE_GAUSSIAN):
        return 1.0 / float(dispersion)
    raise ValueError("the negative binomial has no scalar dispersion factor")


def response_variance(family: Family, mu: ArrayLike, dispersion: float | None):
    """Variance of a single response with mean ``mu``."""
    mu = np.asarray(mu, dtype=float)
    if family.kind is Kind.NEGATIVE_BINOMIAL:
        return mu + mu**2 / dispersion
    return family.unit_variance(mu) * dispersion_scale(family, dispersion)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    """Simulated responses, ``y[r, i, j]`` for replicate r, point i, draw j."""

    design: Design
    y: np.ndarray = field(repr=False)

    @property
    def replicates(self) -> int:
        return self.y.shape[0]

    @property
    def totals(self) -> np.ndarray:
        """Per-point response sums, shape ``(R, 3)``."""
        return self.y.sum(axis=2)

    @property
    def means(self) -> np.ndarray:
        return self.y.mean(axis=2)


def _stream(seed: int, replicate: int, point: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replicate, point))))


def _draw(family: Family, rng: np.random.Generator, mu: float, size: int,
          dispersion: float | None) -> np.ndarray:
    k = family.kind
    if k is Kind.GAUSSIAN:
        return rng.normal(mu, math.sqrt(dispersion), size)
    if k is Kind.POISSON:
        return rng.poisson(mu, size).astype(float)
    if k is Kind.NEGATIVE_BINOMIAL:
        r = dispersion
        return rng.negative_binomial(r, r / (r + mu), size).astype(float)
    if k is Kind.GAMMA:
        return rng.gamma(dispersion, mu / dispersion, size)
    if k is Kind.BINOMIAL:
        return rng.binomial(family.trials, mu / family.trials, size).astype(float)
    return rng.wald(mu, dispersion, size)


def simulate(family: Family, params: ModelParams, design: Design,
             config: SimConfig) -> Dataset:
    """Draw ``config.replicates`` datasets at ``design``.

    Raises :class:`DomainError` if a design mean is outside the family's
    range (Binomial means at or above N are rejected, never clamped).
    """
    mus = np.asarray(mean(params, np.array(design.x)))
    family.check_mean(mus)
    disp = config.dispersion_for(family)
    n = config.counts(design)
    if len(set(n)) != 1:
        raise ConfigError("simulation needs equal replicate counts at every point")
    size = n[0]
    y = np.empty((config.replicates, 3, size))
    for r in range(config.replicates):
        for i, mu in enumerate(mus):
            y[r, i] = _draw(family, _stream(config.seed, r, i), float(mu), size, disp)
    return Dataset(design.with_counts(n), y)


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    beta_hat: ModelParams | None
    converged: bool
    iterations: int
    loglik: float
    score_norm: float
    beta: np.ndarray = field(repr=False, compare=False, default=None)


def _mean_and_grad(beta: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b1, b2, b3 = beta
    pos = x > 0
    safe = np.where(pos, x, 1.0)
    p = np.where(pos, safe**b3, 0.0)
    q = np.where(pos, p * np.log(safe), 0.0)
    grad = np.column_stack([np.ones(3), p, b2 * q])
    return b1 + b2 * p, grad


def _loglik(family: Family, mu: np.ndarray, totals: np.ndarray, n: np.ndarray,
            scale: float) -> float:
    fam = Family(Kind.POISSON) if family.kind is Kind.NEGATIVE_BINOMIAL else family
    return float(np.sum(totals * fam.link(mu) - n * fam.cumulant(mu)) / scale)


def fit(family: Family, totals: ArrayLike, design: Design, start: ModelParams | ArrayLike,
        *, dispersion_scale: float = 1.0, max_iter: int = MAX_ITER) -> FitResult:
    """Maximum likelihood for beta by Fisher scoring with step halving.

    ``totals`` are the per-point response sums and ``design.n`` the counts.
    The dispersion is treated as known; ``dispersion_scale`` (a(phi)) scales
    the score and the information alike, so it cannot move the estimate.
    Converged means ``max |score| < 1e-8 * sum(n)``.
    """
    x = np.array(design.x)
    n = np.array(design.n, dtype=float)
    y = np.asarray(totals, dtype=float)
    if y.shape != (3,):
        raise ValueError("need one response total per design point")
    beta = np.array(start.as_tuple() if isinstance(start, ModelParams) else start, dtype=float)
    tol = SCORE_RTOL * n.sum()
    fam = Family(Kind.POISSON) if family.kind is Kind.NEGATIVE_BINOMIAL else family

    mu, grad = _mean_and_grad(beta, x)
    if not np.all(fam.contains(mu)):
        raise DomainError("starting values put a mean outside the family's range")
    ll = _loglik(family, mu, y, n, dispersion_scale)
    for it in range(max_iter + 1):
        g1, _ = fam.link_derivatives(mu)
        score = grad.T @ ((y - n * mu) * g1) / dispersion_scale
        norm = float(np.max(np.abs(score)))
        if norm < tol:
            return FitResult(_as_params(beta), True, it, ll, norm, beta)
        if it == max_iter:
            break
        info = (grad * (n * g1)[:, None]).T @ grad / dispersion_scale
        if np.linalg.cond(info) > MAX_CONDITION:
            raise SingularInformation(f"scoring matrix is singular at iteration {it}")
        step = np.linalg.solve(info, score)
        for _ in range(_MAX_HALVINGS):
            cand = beta + step
            mu_c, grad_c = _mean_and_grad(cand, x)
            if np.all(fam.contains(mu_c)) and np.all(np.isfinite(grad_c)):
                ll_c = _loglik(family, mu_c, y, n, dispersion_scale)
                if ll_c >= ll - 1e-12 * abs(ll):
                    break
            step = step / 2
        else:
            raise NonConvergence(f"step halving failed at iteration {it}")
        beta, mu, grad, ll = cand, mu_c, grad_c, ll_c
    raise NonConvergence(f"no convergence after {max_iter} iterations (|score| = {norm:.3g})")


def _as_params(beta: np.ndarray) -> ModelParams | None:
    try:
        return ModelParams(*beta)
    except ValueError:
        # a stationary point outside the parameter space (e.g. beta2 < 0)
        return None


def grid_start(design: Design, means: ArrayLike,
               powers: ArrayLike | None = None) -> ModelParams:
    """Crude cold start: least squares over a grid of b3 values.

    For each b3 the best ``(b1, b2)`` is linear least squares; the b3 with
    the smallest residual and admissible ``b1 >= 0``, ``b2 > 0`` wins.
    """
    x = np.array(design.x)
    ybar = np.asarray(means, dtype=float)
    grid = np.geomspace(0.01, 10.0, 400) if powers is None else np.asarray(powers, dtype=float)
    best, best_sse = None, math.inf
    for b3 in grid:
        p = np.where(x > 0, np.where(x > 0, x, 1.0) ** b3, 0.0)
        a = np.column_stack([np.ones(3), p])
        coef, *_ = np.linalg.lstsq(a, ybar, rcond=None)
        b1, b2 = max(coef[0], 0.0), coef[1]
        if b2 <= 0:
            continue
        sse = float(np.sum((ybar - b1 - b2 * p) ** 2))
        if sse < best_sse:
            best, best_sse = (b1, b2, b3), sse
    if best is None:
        raise ConfigError("no increasing Mitscherlich curve fits these means")
    return ModelParams(*best)


# ---------------------------------------------------------------------------
# Covariance check
# ---------------------------------------------------------------------------

def expected_covariance(family: Family, params: ModelParams, design: Design,
                        dispersion: float | None) -> np.ndarray:
    """Asymptotic covariance of beta-hat: ``(J^T diag(n / Var) J)^-1``.

    For the canonical families this is the inverse of info_matrix / a(phi).
    """
    x = np.array(design.x)
    mu, grad = _mean_and_grad(params.as_array(), x)
    w = np.array(design.n, dtype=float) / response_variance(family, mu, dispersion)
    return np.linalg.inv((grad * w[:, None]).T @ grad)


@dataclass(frozen=True)
class CovarianceReport:
    family: str
    params: tuple[float, float, float]
    design: tuple[float, float, float]
    n_per_point: int
    replicates: int
    seed: int
    dispersion: float | None
    failures: int
    mean_estimate: np.ndarray
    empirical: np.ndarray
    expected: np.ndarray
    generalized_variance: float
    log_gv_se: float

    @property
    def diagonal_deviation(self) -> np.ndarray:
        """``emp_kk / exp_kk - 1``."""
        return np.diag(self.empirical) / np.diag(self.expected) - 1.0

    @property
    def relative_deviation(self) -> np.ndarray:
        """Element-wise deviation scaled by ``sqrt(exp_jj exp_kk)``."""
        s = np.sqrt(np.diag(self.expected))
        return (self.empirical - self.expected) / np.outer(s, s)

    @property
    def max_diagonal_deviation(self) -> float:
        return float(np.max(np.abs(self.diagonal_deviation)))

    @property
    def expected_generalized_variance(self) -> float:
        return float(np.linalg.det(self.expected))

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "family": self.family,
            "beta": list(self.params),
            "design": list(self.design),
            "n_per_point": self.n_per_point,
            "replicates": self.replicates,
            "seed": self.seed,
            "dispersion": self.dispersion,
            "failures": self.failures,
            "mean_estimate": self.mean_estimate.tolist(),
            "empirical_covariance": self.empirical.tolist(),
            "expected_covariance": self.expected.tolist(),
            "relative_deviation": self.relative_deviation.tolist(),
            "diagonal_deviation": self.diagonal_deviation.tolist(),
            "max_diagonal_deviation": self.max_diagonal_deviation,
            "generalized_variance": self.generalized_variance,
            "expected_generalized_variance": self.expected_generalized_variance,
            "log_generalized_variance_se": self.log_gv_se,
        }


def fit_replicates(family: Family, params: ModelParams, data: Dataset,
                   start: ModelParams | None = None) -> tuple[np.ndarray, int]:
    """Fit every replicate; returns the estimates ``(R_ok, 3)`` and the failure count.

    Replicates whose fit fails or ends outside the parameter space are
    counted as failures and dropped.
    """
    start = start or ModelParams(*(1.1 * params.as_array()))
    out, failures = [], 0
    for totals in data.totals:
        try:
            res = fit(family, totals, data.design, start)
        except (NonConvergence, SingularInformation, DomainError):
            failures += 1
            continue
        if res.beta_hat is None:
            failures += 1
            continue
        out.append(res.beta)
    return np.array(out).reshape(-1, 3), failures


def log_det_bootstrap_se(estimates: np.ndarray, seed: int, resamples: int = 200) -> float:
    """Bootstrap standard error of ``log det cov(estimates)``."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(2**31,))))
    r = estimates.shape[0]
    vals = np.empty(resamples)
    for b in range(resamples):
        idx = rng.integers(0, r, r)
        vals[b] = np.linalg.slogdet(np.cov(estimates[idx], rowvar=False))[1]
    return float(np.std(vals, ddof=1))


def covariance_check(family: Family, params: ModelParams, design: Design,
                     config: SimConfig) -> CovarianceReport:
    """Simulate, refit and compare the empirical covariance with the theory."""
    data = simulate(family, params, design, config)
    est, failures = fit_replicates(family, params, data)
    if est.shape[0] < 4:
        raise NonConvergence(f"only {est.shape[0]} of {data.replicates} replicates fitted")
    disp = config.dispersion_for(family)
    emp = np.cov(est, rowvar=False)
    return CovarianceReport(
        family=family.name,
        params=params.as_tuple(),
        design=data.design.x,
        n_per_point=data.design.n[0],
        replicates=config.replicates,
        seed=config.seed,
        dispersion=disp,
        failures=failures,
        mean_estimate=est.mean(axis=0),
        empirical=emp,
        expected=expected_covariance(family, params, data.design, disp),
        generalized_variance=float(np.linalg.det(emp)),
        log_gv_se=log_det_bootstrap_se(est, config.seed),
    )
