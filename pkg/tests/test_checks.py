import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riesz_star import checks
from riesz_star.kernel import RieszParams, beta_fn
from riesz_star.steady import with_radius

P = RieszParams()
BUMP = checks.TestFunction("polynomial_odd", (1.0, -5.0))       # w = x (1 - x^2)^2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["polynomial_odd", "random_fourier", "lipschitz_bump"]))
def test_family_admissible(seed, kind):
    for w in checks.TestFunctionFamily(seed=seed, count=3, kind=kind):
        assert float(w(0.0)) == 0.0
        assert abs(float(w.deriv(1.0))) <= 1e-12 and abs(float(w.deriv(-1.0))) <= 1e-12
        assert w.sup_slope() <= 0.05 * (1 + 1e-9)
        x = np.linspace(-1.0, 1.0, 11)
        np.testing.assert_allclose(w(-x), -w(x), atol=1e-15)


def test_family_is_seeded():
    a = list(checks.TestFunctionFamily(seed=3, count=6))
    b = list(checks.TestFunctionFamily(seed=3, count=6))
    assert a == b
    assert [w.kind for w in a[:3]] == ["polynomial_odd", "random_fourier", "lipschitz_bump"]


def test_function_derivative_consistent():
    for w in checks.TestFunctionFamily(seed=1, count=6):
        x = np.linspace(-0.9, 0.9, 7) + 1e-3
        fd = (w(x + 1e-6) - w(x - 1e-6)) / 2e-6
        np.testing.assert_allclose(fd, w.deriv(x), atol=1e-8)


def test_linop_at_grid_nodes_is_finite(profile400):
    g = np.asarray(with_radius(profile400, 1.0).grid)
    vals = checks.linop_L(checks.TestFunction("linear", (0.01,)), profile400, g[1:-1:40])
    assert np.all(np.isfinite(vals))


def test_linop_grid_converges_to_quadrature(profile400):
    w = checks.TestFunction("linear", (0.01,))
    x = np.array([-0.5, 0.0, 0.3, 0.6])
    ref = checks.linop_L(w, profile400, x)
    gaps = []
    for n in (200, 400):
        from riesz_star.steady import solve_steady
        prof = with_radius(profile400 if n == 400 else solve_steady(P, n=n), 1.0)
        g = np.asarray(prof.grid)
        lg = checks.linop_L_grid(w(g), prof.rho, g, P)
        gaps.append(np.max(np.abs(np.interp(x, g, lg) - ref)) / np.max(np.abs(ref)))
    assert gaps[1] < gaps[0] and gaps[1] <= 2e-3


def test_identity_on_model_density():
    rho = checks.SmoothDensity.model()
    assert checks.quadratic_form(BUMP, rho, P) == pytest.approx(-0.39428738562, rel=1e-9)
    for w in [BUMP, *checks.TestFunctionFamily(seed=2, count=2)]:
        assert checks.quadratic_identity_check(w, rho, P).rel_error <= 1e-10
    # a kink in w' converges more slowly but still inside the acceptance bound
    kinked = list(checks.TestFunctionFamily(seed=2, count=3))[2]
    errs = [checks.quadratic_identity_check(kinked, rho, P, m=m).rel_error for m in (8, 16)]
    assert errs[1] < errs[0] <= 1e-6


def test_identity_on_profile(profile400):
    for w in checks.TestFunctionFamily(seed=4, count=2):
        res = checks.quadratic_identity_check(w, profile400)
        assert res.rel_error <= 1e-6
        assert res.lhs < 0.0


def test_identity_requires_params_for_explicit_density():
    with pytest.raises(ValueError):
        checks.quadratic_form(BUMP, checks.SmoothDensity.model())


def test_coercivity_examples(profile400):
    zero = checks.coercivity_check(np.zeros(profile400.grid.size), profile400)
    assert zero.lhs == 0.0 and zero.rhs == 0.0 and zero.passed and zero.ratio == 0.0
    w = BUMP.scaled(0.05)
    res = checks.coercivity_check(w, profile400)
    assert res.passed
    assert res.ratio <= min(1.0, P.gamma / (2.0 * (1.0 - P.s)))
    with pytest.raises(ValueError):
        checks.coercivity_check(w, profile400, weight="flat")


def test_coercivity_theta_weight(profile400):
    # with the discrete pressure weight the inequality is a Cauchy-Schwarz bound
    for w in checks.TestFunctionFamily(seed=8, count=30):
        res = checks.coercivity_check(w, profile400, weight="theta")
        assert res.passed and res.ratio <= 1.0


def test_coercivity_ratio_bounds_over_family(profile400):
    ratios = [checks.coercivity_check(w, profile400).ratio
              for w in checks.TestFunctionFamily(seed=0, count=60)]
    assert max(ratios) <= 1.0
    assert max(ratios) <= P.gamma / (2.0 * (1.0 - P.s))


def test_remainders_vanish_without_increment():
    zero = checks.TestFunction("linear", (0.0,))
    for r in checks.REMAINDERS:
        res = checks.remainder_bound_check(r, zero, 0.3, -0.2, P)
        assert res.value == 0.0 and res.passed


@given(st.floats(-0.45, 0.45), st.floats(-0.9, 0.9), st.floats(0.01, 0.9))
def test_r10_affine_closed_form(c, y, gap):
    w = checks.TestFunction("linear", (c,))
    x = min(y + gap, 1.0)
    dx = x - y
    res = checks.remainder_bound_check("R10", w, x, y, P, aeps=max(abs(c), 1e-3))
    closed = dx / abs(dx) ** (3 - 2 * P.s) * ((1 + c) ** (2 * P.s - 2) - 1)
    assert res.value == pytest.approx(closed, rel=1e-10, abs=1e-12)
    assert res.passed


def test_remainder_rejections():
    w = checks.TestFunction("linear", (0.01,))
    with pytest.raises(ValueError):
        checks.remainder_bound_check("R10", w, 0.2, 0.2, P)
    with pytest.raises(ValueError):
        checks.remainder_bound_check("R10", checks.TestFunction("linear", (0.6,)), 0.2, 0.1, P)
    with pytest.raises(ValueError):
        checks.remainder_bound_check("R10", w, 0.2, 0.1, P, aeps=0.001)
    with pytest.raises(ValueError):
        checks.remainder_value("R5", 0.1, 0.0, P)


def test_remainder_sweep_small():
    sweep = checks.remainder_sweep(P, trials=500, seed=3)
    for rec in sweep.values():
        assert rec["trials"] > 450 and rec["failures"] == 0 and rec["worst_margin"] > 0.0


def test_remainder_scaling_exponents():
    # each remainder has its Taylor terms removed, so it is one order above them
    expected = dict(zip(checks.REMAINDERS, (3.0, 2.0, 1.0, 1.0, 1.0)))
    for r, e in expected.items():
        assert checks.remainder_scaling(r, P, seed=1) == pytest.approx(e, abs=0.2)


def test_hardy_examples():
    zero = checks.hardy_check(lambda x: 0.0 * x, 2.0)
    assert (zero.lhs, zero.rhs, zero.ratio) == (0.0, 0.0, 0.0)
    lin = checks.hardy_check(lambda x: x, 2.0, deriv=np.ones_like)
    assert lin.ratio == pytest.approx(20.0 / 23.0, rel=1e-5)
    for k in (1.0, 0.5):
        with pytest.raises(ValueError):
            checks.hardy_check(lambda x: x, k)
    with pytest.raises(ValueError):
        checks.hardy_check(np.ones(10), 2.0, n=20)


def test_hardy_refinement_stable():
    rng = np.random.default_rng(0)
    for w in checks.TestFunctionFamily(seed=6, count=12):
        k = float(rng.uniform(1.25, 3.0))
        a = checks.hardy_check(w, k, n=2000, deriv=w.deriv).ratio
        b = checks.hardy_check(w, k, n=4000, deriv=w.deriv).ratio
        assert abs(a - b) <= 0.01 * abs(b)


def test_model_single_integral():
    assert checks.model_single_integral(0.0, 0.3, 0.45) == pytest.approx(2.0 * beta_fn(0.7, 0.9), rel=1e-10)
    for x in (0.2, 0.55, 0.97):
        assert checks.model_single_integral(x, 0.3, 0.45) == pytest.approx(
            checks.model_single_integral(-x, 0.3, 0.45), rel=1e-10)
    with pytest.raises(ValueError):
        checks.model_single_integral(1.0, 0.3, 0.45)


def test_beta_identity_points():
    for x in (-0.9, 0.0, 0.7):
        assert checks.beta_identity_check(x, 0.3, 0.45).rel_error <= 1e-8


def test_model_double_integral_stable():
    a = checks.model_double_integral(0.4, 0.4, 0.45, epsrel=1e-6)
    b = checks.model_double_integral(0.4, 0.4, 0.45, epsrel=1e-9)
    assert np.isfinite(a) and a == pytest.approx(b, rel=1e-5)
    with pytest.raises(ValueError):
        checks.model_double_integral(0.99, 0.99, 0.45)
    with pytest.raises(ValueError):
        checks.model_double_integral(0.0, 0.5, 0.45)


def _edge_constant(alpha, edge):
    return checks.weight_bound_check(alpha, xs=np.linspace(-1 + edge, 1 - edge, 41)).constant


def test_weight_bound_model_above_two_s():
    # for alpha > 2s the right-hand side does not vanish faster than the left
    c = [_edge_constant(0.95, e) for e in (1e-2, 1e-3, 1e-4)]
    assert c[0] == pytest.approx(c[2], rel=1e-6)


def test_weight_bound_model_below_two_s_grows():
    # for alpha < 2s the ratio grows like (1 - |x|)^(alpha - 2s) at the edge
    c = [_edge_constant(0.3, e) for e in (1e-3, 1e-4)]
    assert np.log10(c[1] / c[0]) == pytest.approx(2 * P.s - 0.3, abs=0.02)


def test_weight_bound_rejects_alpha():
    for a in (0.0, 1.0):
        with pytest.raises(ValueError):
            checks.weight_bound_check(a)


@pytest.mark.xfail(strict=True, reason="the computed profile decays like d^(1/(gamma-1)) at the "
                                      "vacuum edge, so the empirical constant blows up under refinement")
def test_weight_bound_profile_frozen_constant(profile200, profile400):
    c = checks.weight_bound_check(0.95, profile200).constant
    assert checks.weight_bound_check(0.95, profile400, constant=2.0 * c).passed


def test_kernel_sign_hook_flips_operator(profile400):
    w = checks.TestFunction("linear", (0.01,))
    x = np.array([0.2])
    base = checks.linop_L(w, profile400, x)
    old = checks.KERNEL_SIGN
    try:
        checks.KERNEL_SIGN = -1.0
        g = np.asarray(with_radius(profile400, 1.0).grid)
        flipped = checks.linop_L_grid(w(g), with_radius(profile400, 1.0).rho, g, P)
    finally:
        checks.KERNEL_SIGN = old
    plain = checks.linop_L_grid(w(g), with_radius(profile400, 1.0).rho, g, P)
    np.testing.assert_array_equal(flipped, -plain)
    assert np.sign(np.interp(0.2, g, plain)) == np.sign(base[0])
