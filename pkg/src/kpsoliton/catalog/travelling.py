"""Travelling-wave reduction ``v(x,y,t) -> U(xi)``, ``xi = x + mu*y - nu*t``, and first integrals.

``U = v_x``, so a jet ``v_J`` with ``|J| >= 1`` maps to
``(-nu)^{n_t} mu^{n_y} U^{(|J|-1)}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..jetalgebra import (
    Equation, JetExpr, P, Residual, explicit_coordinates, jet, jet_base,
    map_bases, on_shell_reduce, param, sign, substitute_function,
    total_derivative,
)
from ..jetalgebra.expr import COORD, FN, JET, as_expr
from ..models import GB2D, GKP, ModelSpec
from .registry import ConsLaw, registry
from .verification import constant_ratio

XI = "xi"


class ExplicitCoordinateError(ValueError):
    """The law depends on t, x, y explicitly (or on an undifferentiated v)."""


def U(order: int = 0) -> JetExpr:
    return jet("U", (XI,) * order)


def _sym(value, name: str) -> JetExpr:
    if value is None or value == name:
        return param(name)
    return as_expr(value if isinstance(value, JetExpr) else Fraction(value))


def travelling_wave(e, mu=None, nu=None, dep: str = "v") -> JetExpr:
    """Apply the travelling-wave map; ``mu``/``nu`` default to formal symbols."""
    mu_e, nu_e = _sym(mu, "mu"), _sym(nu, "nu")
    e = as_expr(e)
    coords = explicit_coordinates(e)
    if coords:
        bad = next(m for m, _ in e.sorted_terms()
                   if any(b[0] in (COORD, FN) for b, _ in m))
        raise ExplicitCoordinateError(
            f"expression contains {sorted(coords)} explicitly, e.g. in term "
            f"{JetExpr.from_terms([(bad, e.terms[bad])])}")

    def repl(b):
        if b[0] != JET or b[1] != dep:
            return None
        idx = b[2]
        if not idx:
            raise ExplicitCoordinateError(
                f"undifferentiated {dep} has no travelling-wave image in terms of U = {dep}_x")
        n_t, n_y = idx.count("t"), idx.count("y")
        out = U(len(idx) - 1)
        if n_t:
            out = out * (-nu_e) ** n_t
        if n_y:
            out = out * mu_e ** n_y
        return out

    return map_bases(e, repl)


def reduce_to_first_integral(cl: ConsLaw, mu=None, nu=None,
                             functions: Optional[Dict[str, Sequence]] = None) -> JetExpr:
    """``X + mu*Y - nu*T`` on the travelling wave.

    ``functions`` fixes formal functions to polynomials first (``[]`` = zero).
    """
    T, X, Y = cl.T, cl.X, cl.Y
    for name, poly in (functions or {}).items():
        T, X, Y = (substitute_function(e, name, poly) for e in (T, X, Y))
    mu_e, nu_e = _sym(mu, "mu"), _sym(nu, "nu")
    return travelling_wave(X + mu_e * Y - nu_e * T, mu, nu)


# ----------------------------------------------------------------------------
# published reductions


def published_ode(kind: str, mu=None, nu=None) -> JetExpr:
    mu_e, nu_e = _sym(mu, "mu"), _sym(nu, "nu")
    s2, p = sign("sigma2"), P()
    if kind == GKP:
        return (s2 * mu_e ** 2 - nu_e) * U(1) + U() ** p * U(1) + U(3)
    s = sign("gbs")
    return (1 + s2 * mu_e ** 2 - nu_e ** 2) * U(1) + (p + 1) * U() ** p * U(1) + s * U(3)


def reduced_equation(model: ModelSpec, mu=None, nu=None) -> Equation:
    """The travelling-wave ODE solved for ``U'''``."""
    ode = travelling_wave(model.euler_lagrange, mu, nu)
    if model.kind == GB2D:
        s = JetExpr.constant(model.gb_sign) if model.gb_sign is not None else sign("gbs")
        ode = -s * ode
    return Equation(model.prepare(ode), jet_base("U", (XI,) * 3), f"{model.kind}-U-ode")


@dataclass(frozen=True)
class FirstIntegralPair:
    kind: str
    FI1: JetExpr
    FI2: JetExpr
    C1: JetExpr = JetExpr()
    C2: JetExpr = JetExpr()


def published_first_integrals(kind: str, mu=None, nu=None) -> FirstIntegralPair:
    mu_e, nu_e = _sym(mu, "mu"), _sym(nu, "nu")
    s2, p, half = sign("sigma2"), P(), JetExpr.constant(Fraction(1, 2))
    if kind == GKP:
        k = s2 * mu_e ** 2 - nu_e
        fi1 = U() * U(2) + half * k * U() ** 2 - half * U(1) ** 2 + U() ** (p + 2) / (p + 2)
        fi2 = U(2) + k * U() + U() ** (p + 1) / (p + 1)
        return FirstIntegralPair(kind, fi1, fi2)
    s = sign("gbs")
    k = 1 + mu_e ** 2 * s2 - nu_e ** 2
    fi1 = s * U(2) + k * U() + U() ** (p + 1)
    fi2 = (s * (U() * U(2) - half * U(1) ** 2) + half * k * U() ** 2
           + (p + 1) / (p + 2) * U() ** (p + 2))
    return FirstIntegralPair(kind, fi1, fi2)


def published_separable_ode(kind: str, mu=None, nu=None) -> JetExpr:
    """Right side ``R`` of ``U'^2 = R``."""
    mu_e, nu_e = _sym(mu, "mu"), _sym(nu, "nu")
    s2, p = sign("sigma2"), P()
    if kind == GKP:
        return (nu_e - mu_e ** 2 * s2) * U() ** 2 - 2 / ((p + 2) * (p + 1)) * U() ** (p + 2)
    s = sign("gbs")
    return s * ((nu_e ** 2 - mu_e ** 2 * s2 - 1) * U() ** 2 - 2 / (p + 2) * U() ** (p + 2))


def first_integral_sources(kind: str) -> List[Tuple[str, Dict[str, list], str]]:
    """Laws free of explicit coordinates, with the function choices and the target FI."""
    if kind == GKP:
        return [("gkp-conslaw1", {}, "FI1"), ("gkp-conslaw2", {}, "FI1"),
                ("gkp-conslaw3", {}, "FI1"),
                ("gkp-conslaw5", {"f1": [], "f2": [1]}, "FI2")]
    return [("gb-conslaw1", {}, "FI2"), ("gb-conslaw2", {}, "FI2"), ("gb-conslaw3", {}, "FI2"),
            ("gb-conslaw5", {"f1": [1], "f2": [1]}, "FI1")]


@dataclass(frozen=True)
class FirstIntegralCheck:
    source: str
    target: str
    reduced: JetExpr
    ratio: Optional[JetExpr]  # None when not proportional

    @property
    def ok(self) -> bool:
        return self.ratio is not None


def derive_first_integrals(model: ModelSpec, mu=None, nu=None) -> List[FirstIntegralCheck]:
    """Reduce every eligible law and compare with the published first integrals."""
    reg = registry(model.kind)
    pub = published_first_integrals(model.kind, mu, nu)
    out = []
    for name, funcs, target in first_integral_sources(model.kind):
        red = model.prepare(reduce_to_first_integral(reg.conslaw(name), mu, nu, funcs))
        ref = model.prepare(pub.FI1 if target == "FI1" else pub.FI2)
        out.append(FirstIntegralCheck(name, target, red, constant_ratio(red, ref)))
    return out


def first_integral_residuals(model: ModelSpec, mu=None, nu=None) -> Tuple[Residual, Residual]:
    """``d/dxi`` of each published first integral, reduced modulo the ODE."""
    eq = reduced_equation(model, mu, nu)
    pub = published_first_integrals(model.kind, mu, nu)
    return tuple(
        Residual(model.prepare(on_shell_reduce(total_derivative(model.prepare(fi), XI), eq)),
                 "on-shell")
        for fi in (pub.FI1, pub.FI2))


def separable_ode_residual(model: ModelSpec, mu=None, nu=None) -> Residual:
    """``U'^2 - R`` against the combination of first integrals with ``C1 = C2 = 0``.

    gKP: ``U'^2 - R = -2 (FI1 - U FI2)``; gB: ``U'^2 - R = -2 s (FI2 - U FI1)``.
    """
    pub = published_first_integrals(model.kind, mu, nu)
    rhs = published_separable_ode(model.kind, mu, nu)
    if model.kind == GKP:
        combo = -2 * (pub.FI1 - U() * pub.FI2)
    else:
        combo = -2 * sign("gbs") * (pub.FI2 - U() * pub.FI1)
    return Residual(model.prepare(U(1) ** 2 - rhs - combo))


def ode_residual(model: ModelSpec, mu=None, nu=None) -> Residual:
    """Reduced Euler-Lagrange expression against the printed third-order ODE."""
    red = reduced_equation(model, mu, nu).expr
    if model.kind == GKP:
        return Residual(model.prepare(red - published_ode(model.kind, mu, nu)))
    s = JetExpr.constant(model.gb_sign) if model.gb_sign is not None else sign("gbs")
    return Residual(model.prepare(red - s * published_ode(model.kind, mu, nu)))


# ----------------------------------------------------------------------------
# scaling weights


def scaling_weights(p) -> Dict[str, Fraction]:
    p = Fraction(p)
    if p == 0:
        raise ValueError("p must be nonzero")
    return {
        "E": 1 - 4 / p,
        "Px": 3 - 4 / p,
        "Py": 2 - 4 / p,
        "Q": 5 - 4 / p,
        "F1": -2 / p,
        "F2": 2 - 2 / p,
    }
