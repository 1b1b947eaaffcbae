import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from kpsoliton.soliton import (
    BoxTooSmallError, KinematicError, SolitonParams, SolitonProfile, build_profile, densities,
    first_integral_values, ode_residual, ode_residual_scale, printed_densities, printed_profile,
    profile_table, sample_field, sample_rate, tail_magnitude, validate_kinematics,
)
from kpsoliton.spectral.grid import GridSpec

P_CHOICES = st.sampled_from([Fraction(1), Fraction(2), Fraction(3), Fraction(4), Fraction(3, 2),
                             Fraction(1, 3), Fraction(5, 3)])


@st.composite
def valid_params(draw):
    kind = draw(st.sampled_from(["gkp", "gb2d"]))
    p = draw(P_CHOICES)
    s2 = draw(st.sampled_from([1, -1]))
    mu = draw(st.floats(-1.5, 1.5))
    kappa = draw(st.floats(0.2, 2.0))
    if kind == "gkp":
        return SolitonParams(kind, p, mu, kappa + s2 * mu ** 2, s2)
    s = draw(st.sampled_from([1, -1]))
    if s == -1:
        assume(p.numerator % 2 == 1 and p.denominator % 2 == 1)
    nu2 = 1 + s2 * mu ** 2 + s * kappa
    assume(nu2 > 0.05)
    return SolitonParams(kind, p, mu, math.sqrt(nu2), s2, s)


# closed-form examples ------------------------------------------------------

def test_gkp_p1_profile():
    prof = build_profile(SolitonParams("gkp", 1, 0, 1, 1))
    assert prof.A == pytest.approx(3) and prof.B == pytest.approx(0.5)


def test_gkp_p2_profile():
    prof = build_profile(SolitonParams("gkp", 2, 0, 1, 1))
    assert prof.A == pytest.approx(math.sqrt(6)) and prof.B == pytest.approx(1)


def test_gb_p1_profile():
    params = SolitonParams("gb2d", 1, 0, math.sqrt(2), 1, 1)
    assert params.kappa == pytest.approx(1)
    prof = build_profile(params)
    assert prof.A == pytest.approx(1.5) and prof.B == pytest.approx(0.5)


def test_gb_negative_branch_amplitude_negative():
    prof = build_profile(SolitonParams("gb2d", 1, 0, 0.5, 1, -1))
    assert prof.A < 0


# kinematics ----------------------------------------------------------------

def test_kinematics_examples():
    bad = validate_kinematics(SolitonParams("gkp", 1, 1, 0.5, 1))
    assert not bad and bad.margin == pytest.approx(-0.5) and "nu" in bad.inequality
    assert validate_kinematics(SolitonParams("gkp", 1, 1, -0.3, -1))
    assert not validate_kinematics(SolitonParams("gb2d", 1, 0, 1, 1, 1))


def test_gb_negative_branch_needs_odd_over_odd():
    assert validate_kinematics(SolitonParams("gb2d", Fraction(1, 3), 0, 0.5, 1, -1))
    for p in (2, Fraction(1, 2), Fraction(3, 2)):
        chk = validate_kinematics(SolitonParams("gb2d", p, 0, 0.5, 1, -1))
        assert not chk and "odd" in chk.reason


def test_build_profile_raises_on_violation():
    with pytest.raises(KinematicError):
        build_profile(SolitonParams("gkp", 1, 1, 0.5, 1))


def test_gb_needs_sign():
    with pytest.raises(ValueError):
        SolitonParams("gb2d", 1, 0, 2, 1)
    with pytest.raises(ValueError):
        SolitonParams("gkp", "symbolic", 0, 1)


@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from([1, -1]))
def test_gb_branch_exclusivity(mu, nu, s2):
    a = bool(validate_kinematics(SolitonParams("gb2d", 1, mu, nu, s2, 1)))
    b = bool(validate_kinematics(SolitonParams("gb2d", 1, mu, nu, s2, -1)))
    assert not (a and b)


@given(st.floats(-3, 3), st.floats(0.1, 3))
def test_speed_decomposition(mu, nu):
    params = SolitonParams("gkp", 1, mu, nu, 1)
    assert params.speed * math.sqrt(1 + mu ** 2) == pytest.approx(nu)
    assert math.tan(params.theta) == pytest.approx(mu)


# ODE and first-integral oracles -------------------------------------------

@given(valid_params())
def test_profile_satisfies_ode(params):
    prof = build_profile(params)
    xi = np.linspace(-20 / prof.B, 20 / prof.B, 801)
    scale = ode_residual_scale(params, prof, xi)
    assert np.max(np.abs(ode_residual(params, prof, xi))) < 1e-12 * scale
    c1, c2 = first_integral_values(params, prof, xi)
    amp = max(abs(prof.A), 1.0) ** (float(params.p) + 2) * max(params.kappa, 1.0)
    assert np.max(np.abs(c1)) < 1e-12 * amp
    assert np.max(np.abs(c2)) < 1e-12 * amp


def test_first_integrals_at_sample_points():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    c1, c2 = first_integral_values(params, build_profile(params), np.array([0.0, 1.0, 5.0]))
    np.testing.assert_allclose(c1, 0, atol=1e-12)
    np.testing.assert_allclose(c2, 0, atol=1e-12)
    params = SolitonParams("gb2d", 1, 0, math.sqrt(2), 1, 1)
    c1, c2 = first_integral_values(params, build_profile(params), np.array([0.0, 1.0, 5.0]))
    np.testing.assert_allclose(c1, 0, atol=1e-12)
    np.testing.assert_allclose(c2, 0, atol=1e-12)


def test_perturbed_amplitude_breaks_c2():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    prof = build_profile(params)
    bumped = SolitonProfile(prof.A * 1.01, prof.B, prof.p)
    _, c2 = first_integral_values(params, bumped, np.array([0.0]))
    assert abs(c2[0]) > 1e-3


def test_printed_constants_fail_ode():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    prof = printed_profile(params)
    xi = np.linspace(-10, 10, 401)
    assert np.max(np.abs(ode_residual(params, prof, xi))) > 1e-1
    good = build_profile(params)
    assert np.max(np.abs(ode_residual(params, good, xi))) < 1e-12 * ode_residual_scale(params, good, xi)


def test_residual_decays_at_infinity():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    prof = printed_profile(params)
    assert abs(ode_residual(params, prof, np.array([1e3]))[0]) < 1e-12


# densities -----------------------------------------------------------------

def test_gkp_densities_shape_and_integral():
    params = SolitonParams("gkp", 1, 0.4, 1 + 0.16, 1)
    prof = build_profile(params)
    xi = np.linspace(-60, 60, 24001)
    px, py, e = densities(params, prof, xi)
    np.testing.assert_allclose(px, 0.5 * prof.A ** 2 / np.cosh(prof.B * xi) ** 4, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(py, params.mu * px, rtol=1e-12, atol=1e-300)
    integral = np.trapezoid(px, xi)
    assert integral > 0
    assert integral == pytest.approx(0.5 * prof.A ** 2 * 4 / (3 * prof.B), rel=1e-10)


def test_py_vanishes_for_mu_zero():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    _, py, _ = densities(params, build_profile(params), np.array([0.0]))
    assert py[0] == 0


def test_printed_density_scale_differs():
    # the printed closed forms inherit the printed width constant
    params = SolitonParams("gkp", 1, 0, 1, 1)
    xi = np.linspace(-5, 5, 11)
    px, _, _ = densities(params, build_profile(params), xi)
    px_printed, _, _ = printed_densities(params, xi)
    assert not np.allclose(px, px_printed)


def test_profile_table_columns():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    tab = profile_table(params, build_profile(params), np.linspace(-3, 3, 7))
    assert tab.shape == (7, 5)
    assert tab[3, 1] == pytest.approx(3)


# grid sampling -------------------------------------------------------------

def test_sample_field_tail_small():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    grid = GridSpec(512, 128, 80, 40)
    f = sample_field(params, grid)
    assert f.meta["tail"] < 1e-10
    edge = max(np.max(np.abs(f.data[:, 0])), np.max(np.abs(f.data[:, -1])))
    assert edge < 1e-10 * 3


def test_sample_field_box_too_small():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    with pytest.raises(BoxTooSmallError, match="Lx >="):
        sample_field(params, GridSpec(64, 16, 20, 10))


def test_sample_field_translation_is_index_shift():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    grid = GridSpec(512, 16, 80, 10)
    u0 = sample_field(params, grid, 0.0).data
    u1 = sample_field(params, grid, 8 * grid.dx).data
    np.testing.assert_allclose(u1, np.roll(u0, 8, axis=1), atol=1e-13)


def test_sample_field_crest_orientation():
    mu = 0.5
    params = SolitonParams("gkp", 1, mu, 1 + mu ** 2, 1)
    grid = GridSpec(256, 256, 60, 120)
    u = sample_field(params, grid).data
    gy, gx = np.gradient(u, grid.dy, grid.dx)
    w = gx ** 2 + gy ** 2
    ang = np.arctan2(gy, gx)
    # fold to (-pi/2, pi/2]: gradients on both flanks point along +-(1, mu)
    ang = np.where(ang > math.pi / 2, ang - math.pi, ang)
    ang = np.where(ang <= -math.pi / 2, ang + math.pi, ang)
    assert np.sum(w * ang) / np.sum(w) == pytest.approx(math.atan(mu), abs=1e-3)


def test_sample_rate_is_minus_nu_u_prime():
    params = SolitonParams("gb2d", 1, 0, math.sqrt(2), 1, 1)
    grid = GridSpec(256, 16, 80, 10)
    ut = sample_rate(params, grid).data
    h = 1e-3
    fd = -(sample_field(params, grid, h).data - sample_field(params, grid, -h).data) / (2 * h)
    np.testing.assert_allclose(-ut, fd, atol=1e-6)


def test_tail_magnitude_matches_formula():
    params = SolitonParams("gkp", 2, 0, 1, 1)
    prof = build_profile(params)
    grid = GridSpec(64, 16, 30, 10)
    assert tail_magnitude(params, prof, grid) == pytest.approx(1 / math.cosh(prof.B * 15))
