import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wavedecay.certificate import (
    DampingBounds,
    Provenance,
    Regime,
    SpectralGap,
    balance_quadratic_residual,
    big_F,
    certify,
    classify_regime,
    cubic_critical_points,
    cubic_scale,
    discriminant,
    eta_branch,
    f_value,
    find_F_zeros,
    g_value,
    initial_energy_bound,
    maximize_F,
    sign_cubic,
)
from wavedecay.errors import InvalidParameterError

from conftest import PI2, bisect_oracle, grid_max, rate_oracle

positive = st.floats(0.05, 20.0)
sigma0s = st.floats(0.1, 5.0)
ratios = st.floats(1.0, 4.0)
lambdas = st.floats(0.05, 50.0)


# -- types -------------------------------------------------------------------

def test_damping_bounds_validation():
    assert DampingBounds(1, 1).sigma1 == 1.0
    with pytest.raises(InvalidParameterError, match="sigma1 < sigma0"):
        DampingBounds(2, 1)
    for bad in [(0, 1), (-1, 1), (1, math.inf), (math.nan, 1)]:
        with pytest.raises(InvalidParameterError):
            DampingBounds(*bad)


def test_spectral_gap_validation():
    gap = SpectralGap(PI2, "analytic")
    assert gap.provenance is Provenance.ANALYTIC
    with pytest.raises(InvalidParameterError):
        SpectralGap(0.0)


# -- f, g, eta ---------------------------------------------------------------

def test_f_value_examples():
    assert f_value(1, math.pi, 2, PI2) == pytest.approx(1 - 1 / (2 * math.pi), rel=1e-15)
    assert f_value(0, 1, 5, 3) == 0
    # direct substitution: 0.48 + 0.48(0.48-2)(2.6469)/(2π²)
    assert f_value(0.48, 2.6469, 2, PI2) == pytest.approx(0.38216536744943663, rel=1e-14)


def test_f_value_domain():
    with pytest.raises(InvalidParameterError):
        f_value(1, 0, 2, 1)
    with pytest.raises(InvalidParameterError):
        f_value(1, 1, 2, -1)


def test_g_value_examples():
    assert g_value(0, 1, 1, 2) == 1
    assert g_value(1.7, 3.3, 1.7, 1.7) == 0
    assert g_value(0.48, 2.6469, 1, 2) == pytest.approx(0.3821783973705089, rel=1e-14)
    with pytest.raises(InvalidParameterError):
        g_value(1, -1, 1, 2)


def test_f_and_g_agree_on_the_branch():
    eta = eta_branch(0.48, 1, 2, PI2)
    f = f_value(0.48, eta, 2, PI2)
    g = g_value(0.48, eta, 1, 2)
    assert f == pytest.approx(g, abs=1e-14)
    assert f == pytest.approx(float(rate_oracle(0.48, 1, 2, PI2)), abs=1e-14)


def test_eta_branch_examples():
    assert eta_branch(1, 2, 2, PI2) == pytest.approx(math.pi, rel=1e-15)
    eta = eta_branch(0.48, 1, 2, PI2)
    # closed form evaluated in the textbook (unrationalised) order
    assert eta == pytest.approx(2.646753652152259, rel=1e-13)
    assert balance_quadratic_residual(eta, 0.48, 1, 2, PI2) <= 1e-12


@pytest.mark.parametrize("eps", [0.0, -0.1, 2.0, 2.5])
def test_eta_branch_rejects_endpoints(eps):
    with pytest.raises(InvalidParameterError):
        eta_branch(eps, 1, 2, PI2)


def test_eta_branch_rejects_bad_lambda():
    with pytest.raises(InvalidParameterError):
        eta_branch(0.5, 1, 2, 0.0)


@settings(max_examples=100, deadline=None)
@given(sigma0s, ratios, lambdas, st.floats(0.001, 0.999))
def test_balance_identity(s0, ratio, lam, frac):
    s1 = s0 * ratio
    eps = frac * s1
    eta = eta_branch(eps, s0, s1, lam)
    assert eta > 0
    assert balance_quadratic_residual(eta, eps, s0, s1, lam) <= 1e-10
    F = big_F(eps, s0, s1, lam)
    scale = max(1.0, abs(F))
    assert abs(f_value(eps, eta, s1, lam) - F) <= 1e-10 * scale
    assert abs(g_value(eps, eta, s0, s1) - F) <= 1e-10 * scale


# -- F and the sign cubic -----------------------------------------------------

@given(sigma0s, ratios, lambdas)
def test_F_zero_at_origin(s0, ratio, lam):
    assert big_F(0.0, s0, s0 * ratio, lam) == 0.0


def test_F_examples():
    assert big_F(1, 2, 2, PI2) == pytest.approx(1 - 1 / (2 * math.pi), rel=1e-15)
    assert big_F(0.48, 1, 2, PI2) == pytest.approx(0.38217077675387134, rel=1e-14)
    with pytest.raises(InvalidParameterError):
        big_F(0.5, 1, 2, 0)


def test_F_vectorised():
    eps = np.linspace(-1, 3, 7)
    np.testing.assert_allclose(big_F(eps, 1, 2, PI2), rate_oracle(eps, 1, 2, PI2), rtol=0, atol=1e-14)


@settings(max_examples=100, deadline=None)
@given(sigma0s, ratios, lambdas)
def test_unit_slope_at_origin(s0, ratio, lam):
    h = 1e-6
    slope = (big_F(h, s0, s0 * ratio, lam) - big_F(-h, s0, s0 * ratio, lam)) / (2 * h)
    assert slope == pytest.approx(1.0, abs=1e-4)


@settings(max_examples=100, deadline=None)
@given(sigma0s, ratios, lambdas, st.floats(-1.0, 12.0))
def test_sign_cubic_matches_slope(s0, ratio, lam, eps):
    s1 = s0 * ratio
    c = sign_cubic(eps, s0, s1, lam)
    assume(abs(c) > 1e-4 * cubic_scale(s0, s1, lam))
    h = 1e-7
    slope = (big_F(eps + h, s0, s1, lam) - big_F(eps - h, s0, s1, lam)) / (2 * h)
    assume(abs(slope) > 1e-6)
    assert np.sign(c) == np.sign(slope)


def test_sign_cubic_examples():
    assert sign_cubic(0, 1.3, 2, 4.5) == pytest.approx(2 * 4.5 * 1.3)
    assert sign_cubic(1, 2, 2, PI2) == pytest.approx(0, abs=1e-12)
    assert sign_cubic(0.45, 1, 2, PI2) > 0
    assert sign_cubic(0.50, 1, 2, PI2) < 0


def test_discriminant_examples():
    lam = 1.7
    assert discriminant(math.sqrt(8 * lam), lam) == pytest.approx(0, abs=1e-12)
    assert discriminant(2, PI2) == pytest.approx(12 - 24 * PI2)
    assert discriminant(2, 0.16) == pytest.approx(8.16)
    assert classify_regime(2, PI2) is Regime.UNIQUE_MAX
    assert classify_regime(2, 0.16) is Regime.TWO_MAXIMA
    assert classify_regime(2, 0.5) is Regime.BIFURCATION


# -- critical points ------------------------------------------------------------

def test_critical_points_unique():
    assert cubic_critical_points(2, 2, PI2) == pytest.approx([1.0], abs=1e-14)


def test_critical_points_three():
    # -2(ε-1)(ε²-2ε+0.32)
    pts = cubic_critical_points(2, 2, 0.16)
    assert pts == pytest.approx([1 - math.sqrt(0.68), 1.0, 1 + math.sqrt(0.68)], abs=1e-13)


def test_critical_point_against_bisection():
    expected = bisect_oracle(lambda e: -2 * e**3 + 6 * e * e - (4 * PI2 + 4) * e + 2 * PI2, 0.45, 0.5)
    assert cubic_critical_points(1, 2, PI2) == pytest.approx([expected], abs=1e-14)
    assert expected == pytest.approx(0.4807873565613168, abs=1e-15)


def test_critical_points_triple_root_at_bifurcation():
    # σ0 = σ1 = 2, λ1 = 0.5: -2(ε-1)³
    pts = cubic_critical_points(2, 2, 0.5)
    assert len(pts) == 1 and pts[0] == pytest.approx(1.0, abs=1e-5)


def test_critical_points_tangency():
    # choose σ0 so that the cubic touches zero at its right turning point
    s1, lam = 2.0, 0.16
    turn = 0.5 * s1 + math.sqrt(discriminant(s1, lam)) / 6
    q = ((-2 * turn + 3 * s1) * turn - (4 * lam + s1 * s1)) * turn
    s0 = -q / (2 * lam)
    pts = cubic_critical_points(s0, s1, lam)
    assert len(pts) == 2
    assert pts[1] == pytest.approx(turn, abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(sigma0s, st.floats(1.0, 8.0), st.floats(0.01, 50.0))
def test_critical_points_match_numpy_roots(s0, ratio, lam):
    s1 = s0 * ratio
    pts = cubic_critical_points(s0, s1, lam)
    roots = np.roots([-2.0, 3 * s1, -(4 * lam + s1 * s1), 2 * lam * s0])
    real = np.sort(roots[np.abs(roots.imag) < 1e-7].real)
    assume(len(real) in (1, 3))
    d = np.diff(real)
    assume(d.size == 0 or d.min() > 1e-4)
    assert len(pts) == len(real)
    np.testing.assert_allclose(pts, real, atol=1e-7)
    scale = cubic_scale(s0, s1, lam)
    for p in pts:
        assert abs(sign_cubic(p, s0, s1, lam)) <= 1e-12 * scale
    assert pts == sorted(pts) and all(p > 0 for p in pts)


# -- maximisation -------------------------------------------------------------

def test_maximize_constant_damping_closed_form():
    cert = certify(2, 2, PI2)
    assert cert.eps_star == pytest.approx(1.0, abs=1e-12)
    assert cert.eta_star == pytest.approx(math.pi, abs=1e-12)
    assert cert.alpha_star == pytest.approx(1 - 1 / (2 * math.pi), abs=1e-12)
    assert cert.regime is Regime.UNIQUE_MAX
    assert not cert.tie_broken


def test_maximize_against_grid_oracle():
    cert = certify(1, 2, PI2)
    eps_grid, alpha_grid = grid_max(1, 2, PI2)
    assert cert.alpha_star == pytest.approx(alpha_grid, abs=1e-5)
    assert cert.eps_star == pytest.approx(eps_grid, abs=1e-4)
    # frozen from the grid oracle (step 1e-6) and the bisection root
    assert cert.eps_star == pytest.approx(0.480787, abs=1e-6)
    assert cert.alpha_star == pytest.approx(0.3821734, abs=1e-7)
    assert cert.eta_star == pytest.approx(2.664996233220627, rel=1e-12)


def test_maximize_tie_break():
    cert = certify(2, 2, 0.16)
    eps_grid, alpha_grid = grid_max(2, 2, 0.16)
    assert cert.regime is Regime.TWO_MAXIMA
    assert cert.discriminant == pytest.approx(8.16)
    assert cert.tie_broken
    assert len(cert.local_maxima) == 2
    (e1, f1), (e2, f2) = cert.local_maxima
    assert f1 == pytest.approx(f2, rel=1e-12)
    assert e1 + e2 == pytest.approx(2.0, abs=1e-12)  # symmetry ε -> σ0 - ε
    assert cert.eps_star == pytest.approx(0.17538, abs=1e-4)
    assert cert.eps_star == pytest.approx(eps_grid, abs=1e-4)
    assert cert.alpha_star == pytest.approx(alpha_grid, abs=1e-5)
    assert cert.alpha_star == pytest.approx(0.0835, abs=1e-4)


def test_maximize_nonlinear_bounds():
    cert = certify(1, 3, PI2)
    assert cert.alpha_star == pytest.approx(grid_max(1, 3, PI2)[1], abs=1e-5)
    assert cert.alpha_star == pytest.approx(0.311, abs=1e-3)


def test_certificate_to_dict_keys():
    d = certify(1, 2, PI2, "analytic").to_dict()
    for key in ["sigma0", "sigma1", "lambda1", "lambda1_provenance", "eps_star", "eta_star",
                "alpha_star", "discriminant", "regime", "critical_points", "f_at_star", "g_at_star"]:
        assert key in d
    assert d["lambda1_provenance"] == "analytic"
    assert d["regime"] == "unique_max"


@settings(max_examples=60, deadline=None)
@given(sigma0s, ratios, lambdas)
def test_certificate_invariants(s0, ratio, lam):
    s1 = s0 * ratio
    cert = certify(s0, s1, lam)
    a = cert.alpha_star
    assert a > 0
    assert 0 < cert.eps_star <= s0
    if s1 > s0:
        assert cert.eps_star < s0
    assert cert.eps_star in cert.critical_points
    assert abs(cert.f_at_star - cert.g_at_star) <= 1e-10 * max(1, a)
    assert abs(cert.f_at_star - a) <= 1e-10 * max(1, a)
    assert cert.eta_star > 0
    assert balance_quadratic_residual(cert.eta_star, cert.eps_star, s0, s1, lam) <= 1e-10
    # no admissible ε does better
    eps = np.linspace(0, s0, 4001)[1:]
    assert rate_oracle(eps, s0, s1, lam).max() <= a + 1e-12


@settings(max_examples=60, deadline=None)
@given(sigma0s, ratios, lambdas, st.floats(1.0001, 10.0))
def test_alpha_nondecreasing_in_lambda(s0, ratio, lam, factor):
    s1 = s0 * ratio
    assert certify(s0, s1, lam).alpha_star <= certify(s0, s1, lam * factor).alpha_star + 1e-12


# -- zeros of F ----------------------------------------------------------------

def test_F_zeros_example():
    zeros = find_F_zeros(1, 2, PI2, 4)
    assert len(zeros) == 1
    assert 0.48 < zeros[0] < 1
    expected = bisect_oracle(lambda e: float(rate_oracle(e, 1, 2, PI2)), 0.5, 1.0)
    assert zeros[0] == pytest.approx(expected, abs=1e-12)


def test_F_zeros_constant_damping_include_sigma0():
    zeros = find_F_zeros(2, 2, 0.16, 4)
    assert any(abs(z - 2.0) < 1e-12 for z in zeros)
    for z in zeros:
        assert abs(big_F(z, 2, 2, 0.16)) <= 1e-12 * 2


def test_F_zeros_near_degenerate():
    zeros = find_F_zeros(1, 1.0001, 1, 4)
    assert zeros and all(z < 1 for z in zeros)


def test_F_zeros_limit_validation():
    with pytest.raises(InvalidParameterError):
        find_F_zeros(1, 2, 1, 1.5)


@settings(max_examples=100, deadline=None)
@given(sigma0s, st.floats(1.001, 4.0), lambdas)
def test_zeros_below_sigma0(s0, ratio, lam):
    s1 = s0 * ratio
    for z in find_F_zeros(s0, s1, lam, 2 * s1):
        assert z < s0 + 1e-9
    assert big_F(s0, s0, s1, lam) < 0


# -- initial energy -------------------------------------------------------------

def test_initial_energy_bound():
    assert initial_energy_bound(0, 0) == 0
    assert initial_energy_bound(PI2 / 2, 0) == PI2 / 2
    eps = 0.7
    assert initial_energy_bound(PI2 / 2, eps**2 / 2) == pytest.approx(PI2 / 2 + eps**2 / 2)
    with pytest.raises(InvalidParameterError):
        initial_energy_bound(-1, 0)
