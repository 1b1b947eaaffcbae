"""The generalized KP and 2D generalized Boussinesq equations in potential form."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .jetalgebra import (
    Equation, JetExpr, JetVar, P, Residual, euler_operator, jet_base, sign,
    specialize, total_derivative,
)

GKP = "gkp"
GB2D = "gb2d"
KINDS = (GKP, GB2D)

PValue = Optional[Fraction]


def parse_p(value) -> PValue:
    """``'symbolic'``/None -> None; otherwise an exact rational."""
    if value is None or value == "symbolic":
        return None
    if isinstance(value, float):
        p = Fraction(value).limit_denominator(10_000)
    else:
        p = Fraction(value)
    return p


def _check_p(p: PValue):
    if p is None:
        return
    if p == 0:
        raise ValueError("p = 0 is excluded (classification condition p != 0)")
    if p in (-1, -2):
        raise ValueError(f"p = {p} makes the 1/(p+1) or 1/(p+2) coefficients singular")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    p: PValue
    sigma2: Optional[int]
    gb_sign: Optional[int]
    lagrangian: JetExpr = field(repr=False)
    euler_lagrange: JetExpr = field(repr=False)
    equation: Equation = field(repr=False, compare=False)
    dep: str = "v"

    def prepare(self, e) -> JetExpr:
        """Specialize an expression to this model's fixed parameters."""
        return specialize(e, p=self.p, sigma2=self.sigma2,
                          gbs=self.gb_sign if self.kind == GB2D else None)

    @property
    def p_label(self) -> str:
        return "symbolic" if self.p is None else str(self.p)

    def descriptor(self) -> dict:
        return {"model": self.kind, "p": self.p_label,
                "sigma2": self.sigma2 if self.sigma2 is not None else "symbolic",
                "gb_sign": self.gb_sign if self.gb_sign is not None else "symbolic"}


def gkp_lagrangian() -> JetExpr:
    v, p, s2 = JetVar("v"), P(), sign("sigma2")
    return (-v.t * v.x / 2 + v.xx ** 2 / 2
            - v.x ** (p + 2) / ((p + 1) * (p + 2)) - s2 * v.y ** 2 / 2)


def gb_lagrangian() -> JetExpr:
    v, p, s2, s = JetVar("v"), P(), sign("sigma2"), sign("gbs")
    return (-v.t ** 2 / 2 + v.x ** 2 / 2 + v.x ** (p + 2) / (p + 2)
            - s * v.xx ** 2 / 2 + s2 * v.y ** 2 / 2)


def gkp_potential_equation() -> JetExpr:
    """``v_tx + v_x^p v_xx + v_xxxx + sigma^2 v_yy``."""
    v, p, s2 = JetVar("v"), P(), sign("sigma2")
    return v.tx + v.x ** p * v.xx + v.xxxx + s2 * v.yy


def gb_potential_equation() -> JetExpr:
    """``v_tt - v_xx - (v_x^{p+1})_x -+ v_xxxx - sigma^2 v_yy`` with ``gbs`` the +- sign."""
    v, p, s2, s = JetVar("v"), P(), sign("sigma2"), sign("gbs")
    return v.tt - v.xx - total_derivative(v.x ** (p + 1), "x") - s * v.xxxx - s2 * v.yy


def make_model(kind: str, p="symbolic", sigma2: Optional[int] = None,
               gb_sign: Optional[int] = None) -> ModelSpec:
    """Build a model; ``None`` leaves ``sigma2``/``gb_sign`` as formal signs."""
    if kind not in KINDS:
        raise ValueError(f"unknown model {kind!r}; expected one of {KINDS}")
    p = parse_p(p)
    _check_p(p)
    if sigma2 is not None and sigma2 not in (1, -1):
        raise ValueError("sigma2 must be +1 or -1")
    if kind == GKP:
        lag, published, lead = gkp_lagrangian(), gkp_potential_equation(), jet_base("v", "xxxx")
        gb_sign = None
    else:
        if gb_sign is not None and gb_sign not in (1, -1):
            raise ValueError("gb_sign must be +1 or -1")
        lag, published, lead = gb_lagrangian(), gb_potential_equation(), jet_base("v", "tt")
    gbs = gb_sign if kind == GB2D else None
    lag = specialize(lag, p=p, sigma2=sigma2, gbs=gbs)
    published = specialize(published, p=p, sigma2=sigma2, gbs=gbs)
    el = euler_operator(lag)
    if el != published:
        raise AssertionError(f"Euler-Lagrange expression mismatch: {el} != {published}")
    return ModelSpec(kind, p, sigma2, gb_sign, lag, el, Equation(el, lead, kind))


# ----------------------------------------------------------------------------
# Hamiltonian densities


@dataclass(frozen=True)
class HamiltonianDensity:
    kind: str
    density: JetExpr


def hamiltonian_density(model: ModelSpec) -> HamiltonianDensity:
    v, w, p, s2 = JetVar("v"), JetVar("w"), P(), sign("sigma2")
    if model.kind == GKP:
        h = v.xx ** 2 / 2 - v.x ** (p + 2) / ((p + 1) * (p + 2)) - s2 * v.y ** 2 / 2
    else:
        s = sign("gbs")
        h = (w() ** 2 / 2 + v.x ** 2 / 2 + v.x ** (p + 2) / (p + 2)
             - s * v.xx ** 2 / 2 + s2 * v.y ** 2 / 2)
    return HamiltonianDensity(model.kind, model.prepare(h))


def hamiltonian_consistency(model: ModelSpec, density: Optional[HamiltonianDensity] = None) -> Residual:
    """Check that the Hamiltonian density generates the potential equation.

    gKP: ``v_t = -D_x^{-1} E_v(h)``, i.e. ``v_tx + E_v(h)`` is the Euler-Lagrange
    expression.  gB: ``v_t = E_w(h)`` and ``w_t = -E_v(h)`` with ``w = v_t``.
    """
    h = (density or hamiltonian_density(model)).density
    v = JetVar("v")
    ev = euler_operator(h, "v")
    if model.kind == GKP:
        return Residual(model.euler_lagrange - (v.tx + ev))
    w = JetVar("w")
    r_w = euler_operator(h, "w") - w()
    r_v = model.euler_lagrange - (v.tt + ev)
    return Residual(r_w + r_v)


def u_form_equation(model: ModelSpec) -> JetExpr:
    """The equation in terms of ``u`` with ``u`` replaced by ``v_x``."""
    p, s2, v = P(), sign("sigma2"), JetVar("v")

    def u(*idx):
        return v("x", *idx)

    if model.kind == GKP:
        inner = u("t") + u() ** p * u("x") + u("x", "x", "x")
        e = total_derivative(inner, "x") + s2 * u("y", "y")
    else:
        s = sign("gbs")
        e = (u("t", "t") - u("x", "x")
             - total_derivative(total_derivative(u() ** (p + 1), "x"), "x")
             - s * u("x", "x", "x", "x") - s2 * u("y", "y"))
    return model.prepare(e)


def potential_consistency(model: ModelSpec) -> Residual:
    """The u-form equation is ``D_x`` of the potential Euler-Lagrange expression."""
    return Residual(u_form_equation(model) - total_derivative(model.euler_lagrange, "x"))


# ----------------------------------------------------------------------------
# parameter normalization


@dataclass(frozen=True)
class Scaling:
    """Original variables in terms of normalized ones: ``x = x_factor * x~`` etc.

    ``u_factor`` may be negative (a reflection ``u -> -u``).
    """

    x_factor: float
    y_factor: float
    t_factor: float
    u_factor: float


def _reflection_flips(p: Fraction) -> bool:
    return p.numerator % 2 == 1 and p.denominator % 2 == 1


def normalize_parameters(kind: str, alpha: float, beta: float,
                         gamma: Optional[float] = None,
                         p: Union[Fraction, int, str] = 1):
    """Map the general equation to the normalized one with ``alpha=1, beta,gamma=+-1``.

    Convention: gKP keeps ``x`` and ``t`` unscaled, rescales ``y`` by ``sqrt|beta|``
    and ``u`` by ``|alpha|^(-1/p)``; gB rescales ``x`` and ``t`` by ``sqrt|gamma|``,
    ``y`` by ``sqrt|gamma*beta|`` and ``u`` likewise.  A negative ``alpha`` is
    absorbed by ``u -> -u`` when ``(-1)^p = -1`` is real; otherwise it is rejected.
    """
    p = parse_p(p)
    if p is None:
        raise ValueError("normalization needs a numeric p")
    _check_p(p)
    if alpha == 0 or beta == 0:
        raise ValueError("alpha and beta must be nonzero")
    u_mag = abs(alpha) ** (-1.0 / float(p))
    if alpha < 0:
        if not _reflection_flips(p):
            raise ValueError(
                f"alpha < 0 cannot be normalized to +1 for p = {p}: "
                "u -> -u leaves u^p u_x unchanged in sign")
        u_mag = -u_mag
    sigma2 = 1 if beta > 0 else -1
    if kind == GKP:
        scaling = Scaling(1.0, math.sqrt(abs(beta)), 1.0, u_mag)
        return scaling, make_model(GKP, p, sigma2)
    if kind != GB2D:
        raise ValueError(f"unknown model {kind!r}")
    if gamma is None or gamma == 0:
        raise ValueError("gamma must be nonzero for the Boussinesq model")
    lam = math.sqrt(abs(gamma))
    scaling = Scaling(lam, lam * math.sqrt(abs(beta)), lam, u_mag)
    return scaling, make_model(GB2D, p, sigma2, 1 if gamma > 0 else -1)
