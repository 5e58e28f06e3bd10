import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from riesz_star.kernel import (RegimeError, RieszParams, beta_fn, beta_quadrature, exterior_tail,
                               potential_gradient, potential_gradient_all, riesz_w, riesz_w_prime,
                               weighted_beta_integral)

svals = st.floats(0.36, 0.49)
offsets = st.floats(1e-3, 50.0)


def test_params_regime():
    p = RieszParams()
    assert p.k == pytest.approx(-0.1)
    with pytest.raises(RegimeError):
        RieszParams(0.45, 1.0)
    with pytest.raises(RegimeError):
        RieszParams(0.6, 1.5)
    with pytest.raises(RegimeError):
        RieszParams(0.3, 1.45, strict_regime=True)
    with pytest.raises(RegimeError):
        RieszParams(0.45, 1.35, strict_regime=True)
    RieszParams(0.45, 1.2, strict_regime=True)


@given(svals)
def test_w_at_unit_offset(s):
    p = RieszParams(s, 2.0 * (1.0 - s) + 0.05)
    assert riesz_w(1.0, p) == pytest.approx(1.0 / (2.0 * s - 1.0), rel=1e-14)
    assert riesz_w_prime(1.0, p) == pytest.approx(1.0, rel=1e-14)


@given(offsets)
def test_w_even_and_negative(x):
    p = RieszParams()
    assert riesz_w(x, p) == riesz_w(-x, p)
    assert riesz_w(x, p) < 0.0
    assert riesz_w_prime(-x, p) == -riesz_w_prime(x, p)


def test_w_closed_form_value():
    p = RieszParams()
    via_log = math.exp(-0.1 * math.log(2.0)) / -0.1
    assert riesz_w(2.0, p) == pytest.approx(via_log, rel=1e-14)
    assert riesz_w(2.0, p) == pytest.approx(-9.3303, abs=5e-5)


def test_singular_offset_rejected():
    p = RieszParams()
    for fn in (riesz_w, riesz_w_prime):
        with pytest.raises(ValueError):
            fn(0.0, p)


def test_w_prime_central_difference_second_order():
    p = RieszParams()
    errs = [abs((riesz_w(0.7 + h, p) - riesz_w(0.7 - h, p)) / (2 * h) - riesz_w_prime(0.7, p))
            for h in (1e-2, 5e-3)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)


@settings(max_examples=30)
@given(st.floats(0.01, 5.0), st.floats(0.01, 5.0))
def test_w_prime_antiderivative(a, w):
    p = RieszParams()
    b = a + w
    val, _ = integrate.quad(lambda x: riesz_w_prime(x, p), a, b, epsabs=1e-13, epsrel=1e-12)
    assert val == pytest.approx(riesz_w(b, p) - riesz_w(a, p), rel=1e-9, abs=1e-12)


def test_exterior_tail_matches_quadrature():
    p = RieszParams()
    x = 0.3
    right, _ = integrate.quad(lambda z: riesz_w_prime(x - z, p), 1.0, np.inf)
    left, _ = integrate.quad(lambda z: riesz_w_prime(x - z, p), -np.inf, -1.0)
    assert exterior_tail(x, -1.0, 1.0, p) == pytest.approx(left + right, rel=1e-8)


def _flat(n=201):
    return np.ones(n), np.linspace(-1.0, 1.0, n)


def test_gradient_of_constant_density():
    p = RieszParams()
    rho, grid = _flat()
    assert potential_gradient(rho, grid, 100, p) == pytest.approx(0.0, abs=1e-14)
    expected = (0.5 ** p.k - 1.5 ** p.k) / (1.0 - 2.0 * p.s)
    assert expected == pytest.approx(1.115, abs=1e-3)
    assert potential_gradient(rho, grid, 150, p) == pytest.approx(expected, rel=1e-12)


def test_gradient_vanishes_at_centre_of_profile(profile400):
    rho = np.asarray(profile400.rho)
    g = potential_gradient_all(rho, np.asarray(profile400.grid), profile400.params)
    assert abs(g[profile400.n]) <= 1e-12 * np.max(np.abs(g[1:-1]))
    np.testing.assert_allclose(g[1:-1], -g[1:-1][::-1], rtol=0, atol=1e-12 * np.max(np.abs(g[1:-1])))


def test_gradient_is_linear():
    p = RieszParams()
    grid = np.linspace(-1.0, 1.0, 101)
    rng = np.random.default_rng(3)
    a = np.maximum(0.0, 1.0 - grid ** 2) * rng.uniform(0.5, 1.0, grid.size)
    b = np.maximum(0.0, 1.0 - grid ** 2) ** 2
    lhs = potential_gradient_all(2.0 * a + 3.0 * b, grid, p)
    rhs = 2.0 * potential_gradient_all(a, grid, p) + 3.0 * potential_gradient_all(b, grid, p)
    np.testing.assert_allclose(lhs[1:-1], rhs[1:-1], rtol=1e-12, atol=1e-12)


def test_gradient_input_errors():
    p = RieszParams()
    grid = np.linspace(-1.0, 1.0, 41)
    rho = np.maximum(0.0, 0.25 - grid ** 2)
    with pytest.raises(ValueError):
        potential_gradient(rho - 0.01, grid, 20, p)
    with pytest.raises(ValueError):
        potential_gradient(rho, grid, 2, p)          # outside the support [-0.5, 0.5]
    with pytest.raises(IndexError):
        potential_gradient(rho, grid, 99, p)


def test_beta_values():
    assert beta_fn(1.0, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert abs(beta_fn(0.5, 0.5) - math.pi) <= 1e-10
    assert beta_fn(0.7, 0.9) == pytest.approx(beta_quadrature(0.7, 0.9), rel=1e-10)
    for bad in ((0.0, 1.0), (1.0, -2.0)):
        with pytest.raises(ValueError):
            beta_fn(*bad)


@given(st.floats(0.05, 5.0), st.floats(0.05, 5.0))
def test_beta_symmetric(a, b):
    assert beta_fn(a, b) == pytest.approx(beta_fn(b, a), rel=1e-13)


@settings(max_examples=25)
@given(st.floats(-0.95, 0.95), st.floats(0.05, 0.9), svals)
def test_weighted_beta_integral(x, alpha, s):
    closed = (1.0 + x) ** (2 * s - alpha) * beta_fn(1.0 - alpha, 2 * s)
    assert weighted_beta_integral(x, alpha, s) == pytest.approx(closed, rel=1e-6)
