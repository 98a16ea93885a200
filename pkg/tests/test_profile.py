import math

import mpmath
import numpy as np
import pytest

from ricci_forge import (
    CertificationError,
    ConfigurationError,
    DomainError,
    build_gamma,
    smooth_profile,
)
from ricci_forge.profile import BridgeTheta, validate_c1, validate_smooth

mpmath.mp.dps = 40

T_MAX = math.pi / 2


# ---------------------------------------------------------------------------
# taper gamma
# ---------------------------------------------------------------------------

def test_gamma_plateau_values(gamma33):
    g = gamma33
    assert g.value(-5.0) == 1.0
    assert g.value(0.0) == 1.0
    assert g.value(g.Lambda) == 0.0
    assert g.value(g.Lambda + 1.0) == 0.0
    assert g.d1(-2.0) == 0.0 and g.d2(g.Lambda + 0.5) == 0.0


def test_gamma_support_length_exceeds_inverse_squash(params33, gamma33):
    assert gamma33.Lambda > 1.0 / params33.R0


def test_gamma_derivative_bounds_on_grid(params33, gamma33):
    xs = np.linspace(-1.0, gamma33.Lambda + 1.0, 100_001)
    assert np.max(np.abs(gamma33.d1(xs))) < params33.R0
    assert np.max(np.abs(gamma33.d2(xs))) < params33.R0
    # monotone non-increasing
    assert np.all(gamma33.d1(xs) <= 0.0)


def test_gamma_derivatives_match_finite_differences(gamma33):
    # errors measured against the derivative sups; the derivatives themselves
    # cross zero, where a pointwise relative error is meaningless
    rng = np.random.default_rng(7)
    xs = rng.uniform(0.05, gamma33.Lambda - 0.05, 400)
    (s1, _), (s2, _) = gamma33.derivative_sups()
    h = 1e-6
    fd1 = (gamma33.value(xs + h) - gamma33.value(xs - h)) / (2 * h)
    assert np.max(np.abs(fd1 - gamma33.d1(xs))) < 1e-5 * s1
    h = 1e-3
    fd2 = (gamma33.value(xs + h) - 2 * gamma33.value(xs) + gamma33.value(xs - h)) / h**2
    assert np.max(np.abs(fd2 - gamma33.d2(xs))) < 1e-5 * s2


def test_build_gamma_rejects_small_support():
    with pytest.raises(ConfigurationError) as err:
        build_gamma(0.1, Lambda=5.0)
    assert "2.7" in str(err.value)


def test_build_gamma_rejects_bad_squash():
    with pytest.raises(ConfigurationError):
        build_gamma(0.5)


# ---------------------------------------------------------------------------
# bridge
# ---------------------------------------------------------------------------

def test_bridge_left_boundary_exact(bridge33):
    assert bridge33.value(bridge33.psi) == 0.0
    assert bridge33.d1(bridge33.psi) == 0.0


def test_bridge_right_boundary_values(bridge33):
    br = bridge33
    assert br.theta_b < 0.0 and br.dtheta_b < 0.0
    assert br.q > 0.0
    assert abs(br.value(br.b) - br.theta_b) < 1e-10
    assert abs(br.d1(br.b) - br.dtheta_b) < 1e-14


def test_bridge_value_matches_independent_quadrature(bridge33):
    # integrate the slope numerically in extended precision
    br = bridge33
    q = mpmath.mpf(br.q)
    integral = mpmath.quad(lambda u: u**q, [0, 1])
    theta_b = br.dtheta_b * (br.b - br.psi) * integral
    assert abs(float(theta_b) - br.theta_b) < 1e-10


def test_bridge_concave_and_nonpositive(bridge33):
    br = bridge33
    ts = np.linspace(br.psi, br.b, 10_001)[1:-1]
    assert np.all(br.value(ts) <= 0.0)
    assert np.all(br.d1(ts) <= 0.0)
    assert np.all(br.d2(ts) <= 0.0)


def test_bridge_requires_chord_slope_inequality(params33):
    # a junction candidate far too large makes the exponent negative
    from ricci_forge import build_bridge_theta
    import dataclasses

    bad = dataclasses.replace(params33, psi=0.9 * params33.t_cut)
    with pytest.raises(CertificationError) as err:
        build_bridge_theta(bad)
    assert "2.9" in err.value.check


# ---------------------------------------------------------------------------
# C1 profile
# ---------------------------------------------------------------------------

def test_profile_pole_values(profile33):
    assert profile33.value(0.0) == 0.0
    assert profile33.d1(0.0) == 1.0
    assert profile33.d2(0.0) == 0.0


def test_profile_outer_end_equals_squash(params33, profile33):
    # the taper is exhausted before pi/2, so the value there is exactly R0
    assert profile33.value(T_MAX) == params33.R0


def test_profile_piece_formulas(params33, profile33):
    p = params33
    ts = np.linspace(0.0, p.psi, 50)
    assert np.array_equal(profile33.value(ts), (p.r0 / 2) * np.sin(2 * ts / p.r0))
    ts = np.linspace(p.t_cut, T_MAX, 50)
    x = ts / p.r0 - 1.0
    expected = p.R0 * np.sin(ts + p.shift * profile33.bump.value(x))
    assert np.array_equal(profile33.value(ts), expected)


def test_profile_c1_joins(profile33):
    gaps = profile33.junction_gaps()
    assert max(gaps.values()) < 1e-9


def test_profile_bridge_concavity_ratio(params33, profile33):
    p = params33
    ts = np.linspace(p.psi, p.t_cut, 10_001)[1:-1]
    ratio = -profile33.bridge_eval(ts, 2) / profile33.bridge_eval(ts, 0)
    assert np.min(ratio) >= 4.0 / p.r0**2
    mid = 0.5 * (p.psi + p.t_cut)
    assert -profile33.bridge_eval(mid, 2) / profile33.bridge_eval(mid, 0) >= 4.0 / p.r0**2


def test_profile_outer_concave(params33, profile33):
    ts = np.linspace(params33.t_cut, T_MAX, 10_001)[1:]
    assert np.max(profile33.outer_eval(ts, 2)) < 0.0


def test_profile_positive(profile33):
    ts = np.linspace(0.0, T_MAX, 10_001)[1:]
    assert np.min(profile33.value(ts)) > 0.0


def test_validate_c1_margins_positive(profile33):
    margins = validate_c1(profile33, points=5_000)
    assert all(m > 0.0 for m, _ in margins.values())


def test_profile_domain_error(profile33):
    with pytest.raises(DomainError):
        profile33.value(2.0)
    with pytest.raises(DomainError):
        profile33.value(-0.5)


def _fd_consistency(profile, lo, hi, seed):
    rng = np.random.default_rng(seed)
    ts = rng.uniform(lo, hi, 1_000)
    h1, h2 = 1e-6, 1e-4
    fd1 = (profile.value(ts + h1) - profile.value(ts - h1)) / (2 * h1)
    rel1 = np.abs(fd1 - profile.d1(ts)) / np.maximum(np.abs(profile.d1(ts)), 1e-8)
    fd2 = (profile.value(ts + h2) - 2 * profile.value(ts) + profile.value(ts - h2)) / h2**2
    rel2 = np.abs(fd2 - profile.d2(ts)) / np.maximum(np.abs(profile.d2(ts)), 1e-8)
    return float(np.max(rel1)), float(np.max(rel2))


def test_profile_c1_derivative_consistency(profile33):
    # random points away from the junction set
    r1, r2 = _fd_consistency(profile33, 2e-3, T_MAX - 2e-4, seed=11)
    assert r1 < 1e-5 and r2 < 1e-5


# ---------------------------------------------------------------------------
# smoothed profile
# ---------------------------------------------------------------------------

def test_smooth_identity_outside_windows(params33, profile33, smooth33):
    p = params33
    probe = np.array([
        p.psi - 2 * p.mu, p.psi, 0.5 * (p.psi + p.t_cut), p.t_cut,
        p.t_cut + 2 * p.mu, p.r0, 1.0, T_MAX,
    ])
    assert np.array_equal(smooth33.value(probe), profile33.value(probe))
    assert np.array_equal(smooth33.d1(probe), profile33.d1(probe))
    assert np.array_equal(smooth33.d2(probe), profile33.d2(probe))


def test_smooth_slope_ratio_limit_at_pole(smooth33):
    t = 1e-8
    assert abs((smooth33.d1(t) / smooth33.value(t)) * math.tan(t) - 1.0) < 1e-10


def test_smooth_ratio_band_on_outer_run(params33, smooth33):
    # max of (R''/R + 1) over the outer run stays below mu
    p = params33
    ts = np.linspace(p.t_cut, p.r0, 20_001)
    worst = np.max(smooth33.d2(ts) / smooth33.value(ts) + 1.0)
    assert worst < p.mu


def test_smooth_clause_margins(params33, smooth33):
    margins = validate_smooth(smooth33, points=5_000)
    for name, (margin, _) in margins.items():
        if name == "profile_le_sin":
            assert margin >= 0.0
        else:
            assert margin > 0.0, name
    assert margins["lemma_2_13_a"][0] > 1.0
    # vacuous-perturbation regime: drift margin equals the full budget
    assert margins["lemma_2_13_c"][0] == pytest.approx(params33.mu, rel=1e-12)


def test_smooth_concave_everywhere(smooth33):
    ts = np.linspace(0.0, T_MAX, 10_001)[1:]
    assert np.max(smooth33.d2(ts)) < 0.0


def test_smooth_small_and_monotone_bounds(params33, smooth33):
    p = params33
    ts = np.linspace(0.0, p.r0, 10_001)
    vals = smooth33.value(ts)
    d1 = smooth33.d1(ts)
    assert np.all(np.sin(ts) - vals >= 0.0)
    assert np.all(d1 >= 0.0) and np.all(d1 <= 1.0)
    # squashed bound on the outer region, away from the very top where the
    # shifted sine already passed its maximum
    ts = np.linspace(p.t_cut, T_MAX - p.shift, 10_001)
    assert np.all(p.R0 * np.sin(ts + p.shift) - smooth33.value(ts) >= 0.0)
    ts = np.linspace(p.t_cut, T_MAX, 10_001)
    assert np.all(smooth33.value(ts) <= p.R0)


def test_smooth_strict_slope_bound_outer_half(params33, smooth33):
    p = params33
    ts = np.linspace(p.r0 / 2, p.r0, 5_001)
    margin = 1.0 - (smooth33.d1(ts) / smooth33.value(ts)) * np.tan(ts)
    assert np.min(margin) > 0.0


def test_smooth_derivative_consistency(smooth33):
    r1, r2 = _fd_consistency(smooth33, 2e-3, T_MAX - 2e-4, seed=23)
    assert r1 < 1e-5 and r2 < 1e-5


def test_smooth_profile_rejects_bad_mu(profile33, params33):
    with pytest.raises(ConfigurationError) as err:
        smooth_profile(profile33, params33.mu0 * 2.0)
    assert "2.13" in str(err.value)
    with pytest.raises(ConfigurationError):
        smooth_profile(profile33, 0.0)


def test_smoothing_report_records_acceptance(smooth33):
    rep = smooth33.smoothing_report
    assert rep["attempts"] >= 1
    assert rep["kernel_width"] > 0.0


# ---------------------------------------------------------------------------
# synthetic bridge sanity (construction helper used directly)
# ---------------------------------------------------------------------------

def test_bridge_theta_closed_form_consistency():
    br = BridgeTheta(psi=0.1, b=0.3, theta_b=-0.05, dtheta_b=-0.5, q=1.0)
    # with q = 1 the slope is linear and the value is a parabola
    ts = np.linspace(0.1, 0.3, 101)
    assert np.allclose(br.d1(ts), -0.5 * (ts - 0.1) / 0.2)
    assert br.value(0.3) == pytest.approx(-0.5 * 0.2 / 2.0)
