import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mitscherlich.errors import (
    ConfigError,
    DomainError,
    NonConvergence,
    SingularInformation,
)
from mitscherlich.family import (
    GAMMA,
    GAUSSIAN,
    INVERSE_GAUSSIAN,
    NEGATIVE_BINOMIAL,
    POISSON,
    binomial,
)
from mitscherlich.fisher import info_matrix
from mitscherlich.mle import (
    SCHEMA,
    SimConfig,
    covariance_check,
    dispersion_scale,
    expected_covariance,
    fit,
    fit_replicates,
    grid_start,
    response_variance,
    simulate,
)
from mitscherlich.model import Design, ModelParams, mean
from mitscherlich.solver import dilution_design, efficiency, solve
from mitscherlich.tables import PRESET_BOUNDS, PRESET_ROWS

P = ModelParams(0.5, 1.0, 1.0)
OPT_POISSON = Design((0.0, 2.67, 15.0))


def _draw_means(family, design, cfg):
    data = simulate(family, P, design, cfg)
    return data, np.asarray(mean(P, np.array(design.x)))


# -- configuration --------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(dispersion=0.0), dict(dispersion=-1.0), dict(dispersion=math.inf),
    dict(replicates=0), dict(n_per_point=0), dict(seed=-1), dict(replicates=2.5),
])
def test_config_rejects(kwargs):
    with pytest.raises(ConfigError):
        SimConfig(**kwargs)


def test_dispersion_defaults_and_overrides():
    cfg = SimConfig()
    assert cfg.dispersion_for(POISSON) is None
    assert cfg.dispersion_for(GAUSSIAN) == 1.0
    assert SimConfig(dispersion=3.0).dispersion_for(GAMMA) == 3.0
    assert dispersion_scale(GAMMA, 4.0) == 0.25
    with pytest.raises(ValueError):
        dispersion_scale(NEGATIVE_BINOMIAL, 10.0)


# -- simulation -----------------------------------------------------------------

def test_poisson_sample_means_clt_bound():
    cfg = SimConfig(seed=11, replicates=200, n_per_point=50)
    data, mus = _draw_means(POISSON, OPT_POISSON, cfg)
    grand = data.y.mean(axis=(0, 2))
    assert np.all(np.abs(grand - mus) <= 4 * np.sqrt(mus / (200 * 50)))


@pytest.mark.parametrize("family, disp", [
    (GAUSSIAN, 2.0), (POISSON, None), (NEGATIVE_BINOMIAL, 5.0), (GAMMA, 3.0),
    (binomial(40), None), (INVERSE_GAUSSIAN, 4.0),
])
def test_sample_moments_match_family(family, disp):
    design = Design((0.5, 3.0, 12.0))
    cfg = SimConfig(seed=3, replicates=100, n_per_point=400, dispersion=disp)
    data, mus = _draw_means(family, design, cfg)
    pooled = data.y.transpose(1, 0, 2).reshape(3, -1)
    var = response_variance(family, mus, cfg.dispersion_for(family))
    m = pooled.shape[1]
    assert np.all(np.abs(pooled.mean(axis=1) - mus) <= 5 * np.sqrt(var / m))
    # sample variance: generous relative band, the fourth moment varies by family
    assert np.allclose(pooled.var(axis=1, ddof=1), var, rtol=0.15)


def test_simulation_is_deterministic():
    cfg = SimConfig(seed=5, replicates=20, n_per_point=10)
    a = simulate(POISSON, P, OPT_POISSON, cfg).y
    b = simulate(POISSON, P, OPT_POISSON, cfg).y
    c = simulate(POISSON, P, OPT_POISSON, SimConfig(seed=6, replicates=20, n_per_point=10)).y
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_replicate_streams_do_not_depend_on_replicate_count():
    short = simulate(GAMMA, P, OPT_POISSON, SimConfig(seed=1, replicates=5, n_per_point=7)).y
    long = simulate(GAMMA, P, OPT_POISSON, SimConfig(seed=1, replicates=50, n_per_point=7)).y
    assert np.array_equal(short, long[:5])


def test_binomial_mean_at_trials_rejected():
    with pytest.raises(DomainError):
        simulate(binomial(10), ModelParams(1, 1, 1), Design((0, 5, 9.5)), SimConfig(replicates=1))


def test_unequal_counts_rejected():
    with pytest.raises(ConfigError):
        simulate(POISSON, P, Design((0, 1, 2), (1, 2, 3)), SimConfig(replicates=1))


# -- fitting --------------------------------------------------------------------

@pytest.mark.parametrize("family", [GAUSSIAN, POISSON, GAMMA, binomial(50), INVERSE_GAUSSIAN])
def test_noiseless_data_recovers_truth(family):
    d = Design((0.5, 2.67, 15.0), (7, 7, 7))
    totals = 7 * mean(P, np.array(d.x))
    res = fit(family, totals, d, ModelParams(0.55, 1.1, 1.1))
    assert res.converged
    assert res.beta == pytest.approx(P.as_array(), abs=1e-6)


def test_converged_fit_has_small_score():
    data = simulate(POISSON, P, OPT_POISSON, SimConfig(seed=2, replicates=30, n_per_point=100))
    for totals in data.totals:
        res = fit(POISSON, totals, data.design, P)
        assert res.converged and res.score_norm < 1e-8 * 300


def test_dispersion_does_not_move_estimate():
    data = simulate(GAUSSIAN, P, OPT_POISSON, SimConfig(seed=4, replicates=10, n_per_point=20))
    for totals in data.totals:
        a = fit(GAUSSIAN, totals, data.design, P, dispersion_scale=1.0)
        b = fit(GAUSSIAN, totals, data.design, P, dispersion_scale=7.0)
        assert np.allclose(a.beta, b.beta, rtol=1e-9, atol=1e-12)


def test_poisson_consistency():
    cfg = SimConfig(seed=8, replicates=500, n_per_point=200)
    est, failures = fit_replicates(POISSON, P, simulate(POISSON, P, OPT_POISSON, cfg))
    assert failures == 0
    se = est.std(axis=0, ddof=1) / math.sqrt(est.shape[0])
    assert np.all(np.abs(est.mean(axis=0) - P.as_array()) <= 3 * se)


def test_far_start_converges_or_flags():
    data = simulate(POISSON, P, OPT_POISSON, SimConfig(seed=9, replicates=20, n_per_point=100))
    for totals in data.totals:
        ref = fit(POISSON, totals, data.design, P)
        try:
            res = fit(POISSON, totals, data.design, 10 * P.as_array())
        except (NonConvergence, SingularInformation):
            continue
        assert res.converged
        assert res.beta == pytest.approx(ref.beta, rel=1e-6, abs=1e-8)


def test_iteration_cap_raises():
    d = Design((0.5, 2.67, 15.0), (7, 7, 7))
    totals = 7 * mean(P, np.array(d.x))
    with pytest.raises(NonConvergence):
        fit(POISSON, totals, d, ModelParams(1.0, 2.0, 0.8), max_iter=1)


def test_singular_scoring_matrix():
    d = Design((0.5, 2.67, 15.0), (7, 7, 7))
    totals = 7 * mean(P, np.array(d.x))
    with pytest.raises(SingularInformation):
        fit(POISSON, totals, d, ModelParams(0.5, 1e-14, 1.0))


def test_start_outside_domain():
    with pytest.raises(DomainError):
        fit(POISSON, [1.0, 2.0, 3.0], OPT_POISSON, [-5.0, 1.0, 1.0])


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 2), st.floats(0.2, 2), st.floats(0.3, 2))
def test_grid_start_on_exact_means(b1, b2, b3):
    p = ModelParams(b1, b2, b3)
    d = Design((0.5, 3.0, 12.0))
    start = grid_start(d, mean(p, np.array(d.x)))
    # three exact means: the b3 grid point nearest the truth interpolates closely
    assert start.beta3 == pytest.approx(b3, rel=0.02)
    res = fit(GAUSSIAN, 10 * mean(p, np.array(d.x)), d.with_counts((10, 10, 10)), start)
    assert res.beta == pytest.approx(p.as_array(), rel=1e-6, abs=1e-8)


def test_grid_start_rejects_decreasing_means():
    with pytest.raises(ConfigError):
        grid_start(Design((0.5, 3.0, 12.0)), [3.0, 2.0, 1.0])


# -- covariance -----------------------------------------------------------------

def test_expected_covariance_is_inverse_information():
    d = Design((0.0, 2.67, 15.0), (20, 20, 20))
    assert np.allclose(expected_covariance(POISSON, P, d, None),
                       np.linalg.inv(info_matrix(POISSON, P, d)), rtol=1e-10)
    assert np.allclose(expected_covariance(GAUSSIAN, P, d, 3.0),
                       3.0 * np.linalg.inv(info_matrix(GAUSSIAN, P, d)), rtol=1e-10)
    assert np.allclose(expected_covariance(GAMMA, P, d, 2.0),
                       0.5 * np.linalg.inv(info_matrix(GAMMA, P, d)), rtol=1e-10)


def test_doubling_counts_halves_variances():
    a = covariance_check(POISSON, P, OPT_POISSON, SimConfig(seed=12, replicates=600, n_per_point=200))
    b = covariance_check(POISSON, P, OPT_POISSON, SimConfig(seed=13, replicates=600, n_per_point=400))
    ratio = np.diag(a.empirical) / np.diag(b.empirical)
    # each sample variance has relative SE sqrt(2/599) ~ 0.058
    assert np.all(np.abs(ratio / 2 - 1) < 0.3)
    assert np.allclose(np.diag(a.expected) / np.diag(b.expected), 2.0, rtol=1e-12)


def test_generalized_variance_tracks_efficiency():
    p = PRESET_ROWS[4]
    opt = solve(INVERSE_GAUSSIAN, p, PRESET_BOUNDS).grid_design
    dil = dilution_design(PRESET_BOUNDS.upper, 15.0)
    cfg = SimConfig(seed=21, replicates=1000, n_per_point=500)
    a = covariance_check(INVERSE_GAUSSIAN, p, opt, cfg)
    b = covariance_check(INVERSE_GAUSSIAN, p, dil, cfg)
    eff = efficiency(INVERSE_GAUSSIAN, p, dil, opt).ratio
    # generalized variance is proportional to 1/det(I)
    observed = math.log(a.generalized_variance / b.generalized_variance)
    se = math.hypot(a.log_gv_se, b.log_gv_se)
    assert abs(observed - math.log(eff)) <= 3 * se


def test_report_json_roundtrip():
    rep = covariance_check(GAUSSIAN, P, OPT_POISSON, SimConfig(seed=1, replicates=50, n_per_point=20))
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["schema"] == SCHEMA
    assert d["replicates"] == 50 and d["n_per_point"] == 20
    assert np.allclose(d["empirical_covariance"], rep.empirical)
    assert d["max_diagonal_deviation"] == pytest.approx(np.max(np.abs(d["diagonal_deviation"])))
