import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mitscherlich.errors import DomainError, OrderError, PrecisionError
from mitscherlich.family import GAUSSIAN
from mitscherlich.fisher import det_criterion
from mitscherlich.model import (
    Bounds,
    Design,
    Form,
    ModelParams,
    Parametrization,
    design_matrix,
    from_native_stimuli,
    mean,
    mean_gradient,
    to_native,
    z2_optimal,
    z2_optimal_dette,
)
from mitscherlich.solver import gaussian_x2_closed_form

params_st = st.builds(
    ModelParams,
    st.floats(0.0, 5.0),
    st.floats(0.05, 5.0),
    st.floats(0.1, 3.0),
)


def test_mean_examples():
    assert mean(ModelParams(0.5, 1.0, 1.0), 15.0) == 15.5
    assert mean(ModelParams(1.0, 0.8, 1.1), 0.0) == 1.0
    mpmath.mp.dps = 40
    ref = mpmath.mpf("0.5") + mpmath.mpf("1.2") * mpmath.power(mpmath.mpf("5.21"), mpmath.mpf("0.9"))
    assert mean(ModelParams(0.5, 1.2, 0.9), 5.21) == pytest.approx(float(ref), rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(p=params_st, x=st.floats(1e-6, 15.0))
def test_mean_matches_high_precision(p, x):
    mpmath.mp.dps = 40
    ref = mpmath.mpf(p.beta1) + mpmath.mpf(p.beta2) * mpmath.power(mpmath.mpf(x), mpmath.mpf(p.beta3))
    assert mean(p, x) == pytest.approx(float(ref), rel=1e-13)


def test_gradient_examples():
    p = ModelParams(0.5, 1.0, 1.0)
    assert np.array_equal(mean_gradient(p, 1.0), [1.0, 1.0, 0.0])
    assert np.array_equal(mean_gradient(p, 0.0), [1.0, 0.0, 0.0])


def _fd_gradient(p: ModelParams, x: float) -> np.ndarray:
    out = []
    b = np.array(p.as_tuple())
    for k in range(3):
        h = 1e-6 * max(1.0, abs(b[k]))
        up, dn = b.copy(), b.copy()
        up[k] += h
        dn[k] -= h
        out.append((mean(ModelParams(*up), x) - mean(ModelParams(*dn), x)) / (2 * h))
    return np.array(out)


def test_gradient_matches_finite_differences_500_draws():
    rng = np.random.default_rng(11)
    for _ in range(500):
        p = ModelParams(rng.uniform(0.1, 3), rng.uniform(0.2, 3), rng.uniform(0.2, 2.5))
        x = rng.uniform(0.01, 15.0)
        g = mean_gradient(p, x)
        fd = _fd_gradient(p, x)
        for k in range(3):
            if abs(fd[k]) < 1e-8:
                assert abs(g[k]) < 1e-6
            else:
                assert g[k] == pytest.approx(fd[k], rel=1e-6)


def test_design_matrix_examples():
    x = design_matrix(ModelParams(0.0, 1.0, 1.0), (1.0, 2.0, 3.0))
    expect = [[1, 1, 0], [1, 2, 2 * math.log(2)], [1, 3, 3 * math.log(3)]]
    assert np.allclose(x, expect, rtol=1e-15)
    with pytest.raises(OrderError):
        design_matrix(ModelParams(0.0, 1.0, 1.0), (1.0, 2.0, 2.0))
    row0 = design_matrix(ModelParams(0.5, 1.0, 1.0), (0.0, 5.52, 15.0))[0]
    assert np.array_equal(row0, [1.0, 0.0, 0.0])


def test_design_matrix_at_zero_is_full_rank():
    x = design_matrix(ModelParams(0.5, 1.0, 1.0), (0.0, 0.3, 15.0))
    assert np.linalg.matrix_rank(x) == 3


def test_validation():
    with pytest.raises(ValueError):
        ModelParams(-0.1, 1, 1)
    with pytest.raises(ValueError):
        ModelParams(0.5, 0, 1)
    with pytest.raises(ValueError):
        ModelParams(0.5, 1, -1)
    with pytest.raises(ValueError):
        Bounds(5, 5)
    with pytest.raises(ValueError):
        Bounds(-1, 5)
    with pytest.raises(OrderError):
        Design((1.0, 0.5, 2.0))
    with pytest.raises(DomainError):
        mean(ModelParams(0.5, 1, 1), -1.0)


def test_to_native_examples():
    e = math.e
    params, x, rev = to_native(Parametrization(Form.DETTE, 0.5, 1.0, 2.0), (0.0, 1.0, 2.0))
    assert params.beta3 == 0.5 and not rev
    assert np.allclose(x, (1.0, e, e**2), rtol=1e-15)
    _, x, rev = to_native(Parametrization(Form.HAN_CHALONER, 0.5, 1.0, 1.0), (0.0, 1.0, 2.0))
    assert rev and np.allclose(x, (e**-2, e**-1, 1.0), rtol=1e-15)
    params, x, rev = to_native(Parametrization(Form.BOX_LUCAS, 2.0, 1.0, 0.7), (0.0, 1.0, 2.0))
    assert not rev and np.allclose(x, (1.0, e, e**2), rtol=1e-15)
    assert params.mirrored and params.beta2 == -1.0 and params.beta3 == -0.7


@pytest.mark.parametrize("form", [Form.BOX_LUCAS, Form.HAN_CHALONER, Form.DETTE])
@settings(max_examples=100, deadline=None)
@given(z=st.lists(st.floats(-3, 3), min_size=3, max_size=3, unique=True))
def test_round_trip(form, z):
    z = sorted(z)
    if min(b - a for a, b in zip(z, z[1:])) < 1e-6:
        return
    p = Parametrization(form, 1.0, 0.5, 0.8)
    _, x, _ = to_native(p, z)
    back = from_native_stimuli(p, x)
    assert np.allclose(back, z, rtol=0, atol=1e-12)


@pytest.mark.parametrize("form", [Form.BOX_LUCAS, Form.HAN_CHALONER, Form.DETTE])
def test_native_mean_matches_literature_form(form):
    p = Parametrization(form, 1.3, 0.6, 0.8)
    z = np.linspace(-2, 2, 9)
    native = p.native_params()
    x = p.to_x(z)
    expect = p.mean_z(z)
    got = native.beta1 + native.beta2 * x**native.beta3
    assert np.allclose(got, expect, rtol=1e-13)


def test_dette_matches_gaussian_closed_form_through_exp_map():
    # z1 = 0 maps to x1 = 1, so the cross-check is against the window [1, 15]
    z3 = math.log(15.0)
    z2 = z2_optimal_dette(1.0, 0.0, z3)
    x2 = gaussian_x2_closed_form(ModelParams(0.5, 1.0, 1.0), Bounds(1.0, 15.0))
    assert math.exp(z2) == pytest.approx(x2, rel=1e-13)
    assert 0 < z2 < z3


def test_dette_degenerate_window():
    with pytest.raises(PrecisionError):
        z2_optimal_dette(1.0, 1.0, 1.0)


def _grid_argmax_z(p: Parametrization, z_lo: float, z_hi: float, step: float) -> float:
    """Maximise the Gaussian determinant directly in z, with outer z at the window ends."""
    zs = np.arange(z_lo + step, z_hi, step)
    native = p.native_params()
    z_ends = np.array([z_lo, z_hi])
    x_ends = np.sort(p.to_x(z_ends))
    x_mid = p.to_x(zs)
    gp = native if not native.mirrored else None
    if gp is None:
        # mirrored powers: evaluate |J|^2 from the gradient rows directly
        vals = []
        for xm in x_mid:
            xs = np.sort([x_ends[0], xm, x_ends[1]])
            rows = [[1.0, v**native.beta3, native.beta2 * v**native.beta3 * math.log(v)] for v in xs]
            vals.append(np.linalg.det(np.array(rows)) ** 2)
        vals = np.array(vals)
    else:
        vals = det_criterion(GAUSSIAN, native, x_ends[0], x_mid, x_ends[1])
    return float(zs[int(np.argmax(vals))])


@pytest.mark.parametrize("form,params", [
    (Form.DETTE, (0.5, 1.0, 2.0)),
    (Form.HAN_CHALONER, (0.5, 1.0, 0.7)),
    (Form.BOX_LUCAS, (2.0, 1.0, 0.7)),
])
def test_optimal_design_is_parametrization_invariant(form, params):
    p = Parametrization(form, *params)
    z_lo, z_hi = 0.0, 2.0
    step = 1e-4
    assert z2_optimal(p, z_lo, z_hi) == pytest.approx(_grid_argmax_z(p, z_lo, z_hi, step), abs=step)


def test_dette_grid_example():
    z2 = z2_optimal_dette(2.0, 0.0, 2.0)
    assert 0 < z2 < 2
    p = Parametrization(Form.DETTE, 0.5, 1.0, 2.0)
    assert z2 == pytest.approx(_grid_argmax_z(p, 0.0, 2.0, 1e-4), abs=1e-4)
