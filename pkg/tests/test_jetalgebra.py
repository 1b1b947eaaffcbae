from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kpsoliton.jetalgebra import (
    JetVar, NonAffineExponentError, P, SexprError, const, coord, dumps, euler_operator, evaluate,
    fn, jet, jet_base, loads, normalize, on_shell_reduce, power, sign, total_derivative,
    verify_divergence_identity, verify_symmetry, verify_variational,
)
from kpsoliton.jetalgebra.expr import JET
from kpsoliton.models import make_model
from kpsoliton.soliton import SolitonParams, build_profile, profile_jets

from strategies import expressions

v = JetVar("v")
COORDS = st.sampled_from(["t", "x", "y"])


# normal form ---------------------------------------------------------------

def test_commutativity_cancels():
    assert normalize(v.x * v.y - v.y * v.x).is_zero()


def test_exponents_add():
    assert power(v.x, P() + 1) * v.x == power(v.x, P() + 2)


def test_non_affine_exponent_rejected():
    with pytest.raises(NonAffineExponentError):
        power(v.x, P() * P())


def test_mixed_partials_sorted():
    assert jet("v", "yx") == jet("v", "xy")
    assert jet_base("v", "tyx") == jet_base("v", "txy")


@given(expressions())
def test_normalize_idempotent(e):
    n = normalize(e)
    assert normalize(n) == n


@given(expressions(), expressions())
def test_sum_order_independent(a, b):
    assert a + b == b + a
    assert (a + b) - b == a


@given(expressions(5), expressions(5), expressions(5))
def test_distributivity(a, b, c):
    assert a * (b + c) == a * b + a * c


# total derivatives ---------------------------------------------------------

def test_dx_of_v():
    assert total_derivative(v(), "x") == v.x


def test_dx_power_symbolic():
    expected = (P() + 2) * power(v.x, P() + 1) * v.xx
    assert total_derivative(power(v.x, P() + 2), "x") == expected


def test_dt_formal_function_chain_rule():
    f = fn("f1", (("y", 1), ("t", 1, 1)))
    df = fn("f1", (("y", 1), ("t", 1, 1)), 1)
    assert total_derivative(f, "t") == sign("sigma") * df
    assert total_derivative(f, "y") == df


def test_sigma_squared_rewrites():
    assert sign("sigma") * sign("sigma") == sign("sigma2")
    assert sign("sigma2") * sign("sigma2") == const(1)


def _poly_derivs(rng, z):
    """``v_x`` and ``v_xx`` of a random cubic polynomial in (t, x, y) at complex x."""
    c = rng.normal(size=(4, 4, 4))
    t, x, y = 0.3, z, -0.7
    cx = np.polynomial.polynomial.polyder(c, 1, axis=1)
    cxx = np.polynomial.polynomial.polyder(c, 2, axis=1)
    pv = np.polynomial.polynomial.polyval3d
    return pv(t, x, y, cx), pv(t, x, y, cxx)


def test_dx_power_numeric_cross_check():
    # p = 3: D_x(v_x^5) against a complex-step derivative of v_x^5 along x
    rng = np.random.default_rng(7)
    e = total_derivative(power(v.x, P() + 2), "x")
    for x0 in (0.1, 0.5, 1.3):
        state = rng.bit_generator.state
        vx, vxx = _poly_derivs(rng, x0)
        rng.bit_generator.state = state
        h = 1e-30
        vx_c, _ = _poly_derivs(rng, complex(x0, h))
        numeric = (vx_c ** 5).imag / h
        symbolic = evaluate(e, {"v_x": vx, "v_xx": vxx}, p=Fraction(3))
        assert symbolic == pytest.approx(numeric, rel=1e-9)


@given(expressions(6))
def test_total_derivatives_commute(e):
    assert (total_derivative(total_derivative(e, "x"), "y")
            == total_derivative(total_derivative(e, "y"), "x"))
    assert (total_derivative(total_derivative(e, "t"), "x")
            == total_derivative(total_derivative(e, "x"), "t"))


@given(expressions(5), expressions(5), COORDS)
def test_leibniz(a, b, c):
    lhs = total_derivative(a * b, c)
    rhs = total_derivative(a, c) * b + a * total_derivative(b, c)
    assert lhs == rhs


@given(expressions(5), expressions(5), expressions(5))
def test_euler_kills_divergences(a, b, c):
    div = total_derivative(a, "t") + total_derivative(b, "x") + total_derivative(c, "y")
    assert euler_operator(div).is_zero()


# Euler operator on the model Lagrangians ----------------------------------

def test_euler_gkp_lagrangian():
    m = make_model("gkp")
    expected = v.tx + power(v.x, P()) * v.xx + v.xxxx + sign("sigma2") * v.yy
    assert euler_operator(m.lagrangian) == expected


def test_euler_gb_lagrangian():
    m = make_model("gb2d")
    expected = (v.tt - v.xx - (P() + 1) * power(v.x, P()) * v.xx
                - sign("gbs") * v.xxxx - sign("sigma2") * v.yy)
    assert euler_operator(m.lagrangian) == expected


# on-shell reduction --------------------------------------------------------

def test_on_shell_equation_itself():
    m = make_model("gkp")
    assert on_shell_reduce(m.euler_lagrange, m.equation).is_zero()


def test_on_shell_unchanged_without_leading():
    m = make_model("gkp")
    e = v.txy * v.x + power(v.x, P()) * v.yy
    assert on_shell_reduce(e, m.equation) == e


def test_on_shell_vxxxxy_symbolic():
    m = make_model("gkp")
    solved = -v.tx - power(v.x, P()) * v.xx - sign("sigma2") * v.yy
    assert on_shell_reduce(v("x", "x", "x", "x", "y"), m.equation) == total_derivative(solved, "y")


def test_on_shell_vxxxxy_on_exact_solution():
    # v = V(x + mu y - nu t) with V' = U, U the p=1 line soliton
    mu, nu = 0.5, 1.25
    params = SolitonParams("gkp", 1, mu, nu, 1)
    prof = build_profile(params)
    m = make_model("gkp", 1, 1)
    red = on_shell_reduce(v("x", "x", "x", "x", "y"), m.equation)
    xi = np.linspace(-6, 6, 13)
    jets = profile_jets(prof, xi)[:4]

    def resolve(base):
        assert base[0] == JET
        idx = base[2]
        order = len(idx) - 1
        return mu ** idx.count("y") * (-nu) ** idx.count("t") * jets[order]

    h = 1e-4
    U4 = (profile_jets(prof, xi + h)[3] - profile_jets(prof, xi - h)[3]) / (2 * h)
    np.testing.assert_allclose(evaluate(red, {}, p=1, resolve=resolve), mu * U4, atol=1e-7)


# identity checks -----------------------------------------------------------

def test_broken_triple_has_witness():
    m = make_model("gkp")
    r = verify_divergence_identity(v.x, v.t, const(0), const(0), m)
    assert not r.is_zero
    assert r.witness == 2 * v.tx


def test_trivial_curl_triple_is_conserved():
    # (v_x, -v_t, 0) is a null divergence, so it always passes
    m = make_model("gkp")
    assert verify_divergence_identity(v.x, -v.t, const(0), const(0), m).is_zero


def test_residual_witness_iff_nonzero():
    m = make_model("gkp")
    ok = verify_symmetry(-v.x, m)
    assert ok.is_zero and ok.witness is None and bool(ok)
    bad = verify_symmetry(v(), m)
    assert not bad.is_zero and bad.witness is not None


def test_translation_variational():
    m = make_model("gkp")
    assert verify_variational(-v.t, m).is_zero


def test_gkp_scaling_variational_witness_has_p_minus_1():
    m = make_model("gkp")
    P4 = (1 - 2 / P()) * v() - coord("x") * v.x - 2 * coord("y") * v.y - 3 * coord("t") * v.t
    assert verify_symmetry(P4, m).is_zero
    r = verify_variational(P4, m)
    assert not r.is_zero
    m1 = make_model("gkp", 1)
    assert verify_variational(P4, m1).is_zero


# s-expressions -------------------------------------------------------------

@given(expressions())
def test_sexpr_round_trip(e):
    assert loads(dumps(e)) == e


def test_sexpr_parses_fractions_and_functions():
    e = loads("(+ (* 1/2 (^ v_x (+ p 2))) (* sigma (fn f1 1 (+ (* sigma t) y))))")
    assert e == (const(Fraction(1, 2)) * power(v.x, P() + 2)
                 + sign("sigma") * fn("f1", (("y", 1), ("t", 1, 1)), 1))


@pytest.mark.parametrize("text", ["(+ v_x", "(^ v_x (* p p))", "(frob v)", ")"])
def test_sexpr_errors(text):
    with pytest.raises((SexprError, NonAffineExponentError)):
        loads(text)
