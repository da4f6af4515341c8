import itertools

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mitscherlich.errors import DomainError
from mitscherlich.family import (
    GAMMA,
    GAUSSIAN,
    INVERSE_GAUSSIAN,
    NEGATIVE_BINOMIAL,
    POISSON,
    binomial,
)
from mitscherlich.fisher import (
    HeteroSpec,
    bracket,
    det3,
    det_criterion,
    det_explicit,
    hetero_h,
    hetero_info_matrix,
    hetero_score_covariances,
    info_det,
    info_matrix,
    score_covariances,
    weighted_lsq_det,
)
from mitscherlich.model import Design, ModelParams, design_matrix, mean

FAMILIES = [GAUSSIAN, POISSON, NEGATIVE_BINOMIAL, GAMMA, INVERSE_GAUSSIAN, binomial(100)]


def _random_case(rng):
    """Random family, parameters and a design spanning the window [0, 15].

    Designs with all three stimuli crowded together are covered separately
    in test_clustered_designs_against_high_precision: their information
    matrices have condition numbers up to ~1e9, so a double-precision
    determinant of the assembled matrix is not good to 1e-10 there.
    """
    while True:
        fam = FAMILIES[rng.integers(len(FAMILIES))]
        p = ModelParams(rng.uniform(0.1, 2), rng.uniform(0.2, 2), rng.uniform(0.3, 1.5))
        x1 = 0.0 if rng.random() < 0.3 else rng.uniform(0, 3)
        x2 = rng.uniform(x1 + 0.5, 10)
        x3 = rng.uniform(x2 + 1, 15)
        n = tuple(int(v) for v in rng.integers(1, 6, 3))
        d = Design((x1, x2, x3), n)
        if fam.contains(mean(p, np.array(d.x))).all():
            return fam, p, d


def test_det3_against_numpy():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(50, 3, 3))
    assert np.allclose(det3(m), np.linalg.det(m), rtol=1e-12)


def test_info_matrix_gaussian_is_xtx():
    p = ModelParams(0.5, 1.0, 1.0)
    d = Design((0.0, 1.0, 2.0))
    x = design_matrix(p, d.x)
    assert np.allclose(info_matrix(GAUSSIAN, p, d), x.T @ x, rtol=1e-14)


def test_info_matrix_poisson_direct_summation():
    p = ModelParams(0.5, 1.0, 1.0)
    d = Design((0.0, 2.67, 15.0))
    expect = np.zeros((3, 3))
    for xi in d.x:
        mu = 0.5 + xi
        g = np.array([1.0, xi, xi * np.log(xi) if xi > 0 else 0.0])
        expect += np.outer(g, g) / mu
    assert np.allclose(info_matrix(POISSON, p, d), expect, rtol=1e-14)


def test_info_matrix_scales_with_counts():
    p = ModelParams(0.5, 1.0, 1.0)
    a = info_matrix(GAMMA, p, Design((1.0, 2.0, 3.0), (1, 2, 3)))
    b = info_matrix(GAMMA, p, Design((1.0, 2.0, 3.0), (3, 6, 9)))
    assert np.allclose(b, 3 * a, rtol=1e-14)


def test_info_matrix_rejects_binomial_mean_above_trials():
    with pytest.raises(DomainError):
        info_matrix(binomial(10), ModelParams(0.5, 1.0, 1.0), Design((0.0, 2.0, 15.0)))


def test_det_explicit_table2_row1():
    d = Design((0.0, 0.26, 5.21))
    assert det_explicit(INVERSE_GAUSSIAN, ModelParams(0.5, 1.2, 0.9), d) == pytest.approx(1.455, abs=0.005)


def test_det_vanishes_for_repeated_stimulus():
    p = ModelParams(0.5, 1.0, 1.0)
    assert det_criterion(POISSON, p, 0.0, 3.0, 3.0) == 0.0
    assert det_criterion(POISSON, p, 2.0, 2.0, 5.0) == 0.0


def test_three_determinant_routes_agree_200_cases():
    rng = np.random.default_rng(5)
    for _ in range(200):
        fam, p, d = _random_case(rng)
        ref = det_explicit(fam, p, d)
        assert np.linalg.det(info_matrix(fam, p, d)) == pytest.approx(ref, rel=1e-10)
        assert info_det(fam, p, d) == pytest.approx(ref, rel=1e-10)
        assert weighted_lsq_det(fam, p, d) == pytest.approx(ref, rel=1e-10)


def _mp_info_det(fam, p, d):
    mpmath.mp.dps = 60
    b2, b3 = mpmath.mpf(p.beta2), mpmath.mpf(p.beta3)
    m = mpmath.zeros(3, 3)
    for x, n in zip(d.x, d.n):
        x = mpmath.mpf(x)
        px = x**b3 if x > 0 else mpmath.mpf(0)
        g = mpmath.matrix([1, px, b2 * px * mpmath.log(x) if x > 0 else 0])
        w = n * mpmath.mpf(fam.link_derivatives(mean(p, float(x)))[0])
        m += w * g * g.T
    return mpmath.det(m)


def test_clustered_designs_against_high_precision():
    rng = np.random.default_rng(17)
    for _ in range(100):
        fam = FAMILIES[rng.integers(len(FAMILIES))]
        p = ModelParams(rng.uniform(0.1, 2), rng.uniform(0.2, 2), rng.uniform(0.3, 1.5))
        x = np.sort(rng.uniform(10, 14, 3))
        if np.min(np.diff(x)) < 0.2 or not fam.contains(mean(p, x)).all():
            continue
        d = Design(tuple(x))
        ref = float(_mp_info_det(fam, p, d))
        assert det_explicit(fam, p, d) == pytest.approx(ref, rel=1e-10)
        assert weighted_lsq_det(fam, p, d) == pytest.approx(ref, rel=1e-10)
        assert info_det(fam, p, d) == pytest.approx(ref, rel=1e-7)


def test_bracket_against_high_precision():
    mpmath.mp.dps = 50
    p = ModelParams(0.5, 1.0, 0.8)
    x1, x2, x3 = 0.7, 2.3, 11.0
    b = mpmath.mpf(0.8)
    X1, X2, X3 = (mpmath.mpf(v) for v in (x1, x2, x3))
    ref = ((X1 * X2) ** b * mpmath.log(X2 / X1) - (X1 * X3) ** b * mpmath.log(X3 / X1)
           + (X2 * X3) ** b * mpmath.log(X3 / X2))
    assert bracket(p, x1, x2, x3) == pytest.approx(float(ref), rel=1e-13)


def test_weighted_lsq_examples():
    p = ModelParams(0.5, 1.0, 1.0)
    d = Design((0.5, 2.0, 9.0))
    x = design_matrix(p, d.x)
    assert weighted_lsq_det(GAUSSIAN, p, d) == pytest.approx(np.linalg.det(x.T @ x), rel=1e-12)
    one = det_explicit(POISSON, p, d)
    assert det_explicit(POISSON, p, d.with_counts((2, 3, 4))) == pytest.approx(24 * one, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(perm=st.permutations([0, 1, 2]))
def test_det_symmetric_under_relabelling(perm):
    p = ModelParams(0.5, 1.0, 0.9)
    x = np.array([0.4, 3.0, 12.0])
    n = np.array([1, 4, 2])
    xs, ns = x[list(perm)], n[list(perm)]
    # the bracket is antisymmetric, its square symmetric
    m = bracket(p, *xs) ** 2
    w = np.prod([k * POISSON.link_derivatives(mean(p, v))[0] for k, v in zip(ns, xs)])
    assert p.beta2**2 * m * w == pytest.approx(det_explicit(POISSON, p, Design(tuple(x), tuple(n))),
                                               rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(x=st.lists(st.floats(0.01, 15), min_size=3, max_size=3, unique=True))
def test_det_positive_for_distinct_stimuli(x):
    x = sorted(x)
    if min(b - a for a, b in zip(x, x[1:])) < 1e-3:
        return
    assert det_explicit(GAMMA, ModelParams(0.5, 1.0, 1.0), Design(tuple(x))) > 0


# -- heteroscedastic normal -------------------------------------------------

def test_h_examples():
    assert hetero_h(HeteroSpec.power_law(2.0, 1.0), 1.0) == pytest.approx(3.0)
    assert hetero_h(HeteroSpec.constant(4.0), 7.0) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        hetero_h(HeteroSpec.power_law(1.0), 0.0)


def test_h_matches_custom_variance_function():
    rng = np.random.default_rng(3)
    for _ in range(50):
        p, s2, mu = rng.uniform(0.1, 3), rng.uniform(0.1, 4), rng.uniform(0.1, 20)
        custom = HeteroSpec(sigma2=s2, variance_fn=lambda m, p=p: m**p,
                            variance_deriv=lambda m, p=p: p * m ** (p - 1),
                            variance_deriv2=lambda m, p=p: p * (p - 1) * m ** (p - 2))
        power = HeteroSpec.power_law(p, s2)
        assert power.h(mu) == pytest.approx(custom.h(mu), rel=1e-12)
        assert power.h_prime(mu) == pytest.approx(custom.h_prime(mu), rel=1e-10)
        eps = 1e-6 * mu
        fd = (power.h(mu + eps) - power.h(mu - eps)) / (2 * eps)
        assert power.h_prime(mu) == pytest.approx(fd, rel=1e-6)


def test_hetero_info_reduces_to_gaussian():
    p = ModelParams(0.5, 1.0, 1.0)
    d = Design((0.0, 3.0, 15.0))
    assert np.allclose(hetero_info_matrix(HeteroSpec.constant(2.5), p, d),
                       info_matrix(GAUSSIAN, p, d) / 2.5, rtol=1e-14)


def test_hetero_det_matches_closed_form_200_cases():
    rng = np.random.default_rng(9)
    for _ in range(200):
        spec = HeteroSpec.power_law(rng.uniform(0.1, 3.5), rng.uniform(0.2, 3))
        _, p, d = _random_case(rng)
        assert np.linalg.det(hetero_info_matrix(spec, p, d)) == pytest.approx(
            det_explicit(spec, p, d), rel=1e-10)


def test_hetero_score_covariances_examples():
    spec = HeteroSpec.power_law(2.0, 1.0)
    p = ModelParams(0.5, 1.0, 1.0)
    d = Design((0.5, 2.0, 10.0))
    cov = hetero_score_covariances(spec, p, d)
    assert cov.var_phi == pytest.approx(1.5)
    assert np.all(cov.cov_beta_phi != 0)
    # direct evaluation of (1 / 2 sigma^2) sum n (phi'/phi) grad
    expect = np.zeros(3)
    for x in d.x:
        mu = 0.5 + x
        expect += 0.5 * (2.0 / mu) * np.array([1.0, x, x * np.log(x)])
    assert np.allclose(cov.cov_beta_phi, expect, rtol=1e-13)
    flat = hetero_score_covariances(HeteroSpec.constant(1.0), p, d)
    assert np.array_equal(flat.cov_beta_phi, np.zeros(3))
    full = cov.full_matrix()
    assert np.allclose(full, full.T)


def test_homoscedastic_cross_covariance_is_zero():
    for fam in FAMILIES:
        c = score_covariances(fam, ModelParams(0.5, 1.0, 1.0), Design((0.0, 2.0, 9.0)))
        assert np.array_equal(c.cov_beta_phi, np.zeros(3))


@pytest.mark.parametrize("scale", list(itertools.product([0.9, 1.1], repeat=3)))
def test_var_phi_free_of_beta(scale):
    spec = HeteroSpec.power_law(1.5, 0.7)
    d = Design((0.0, 2.0, 9.0), (2, 3, 4))
    base = hetero_score_covariances(spec, ModelParams(0.5, 1.0, 1.0), d).var_phi
    p = ModelParams(0.5 * scale[0], scale[1], scale[2])
    assert hetero_score_covariances(spec, p, d).var_phi == base == 9 / (2 * 0.7**2)
