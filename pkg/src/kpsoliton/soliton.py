"""Exact line solitons ``u = U(x + mu*y - nu*t)`` with ``U = A sech^{2/p}(B xi)``.

The constants come from the separable first-order ODE obtained from the two
first integrals with ``C1 = C2 = 0``:

* gKP: ``A^p = kappa (p+1)(p+2)/2``, ``B = (p/2) sqrt(kappa)``, ``kappa = nu - mu^2 sigma^2``
* gB:  ``A^p = kappa (p+2)/2``, ``B = (p/2) sqrt(s kappa)``, ``kappa = nu^2 - mu^2 sigma^2 - 1``
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

from .catalog import published_first_integrals, registry, travelling_wave
from .catalog.travelling import XI
from .jetalgebra import evaluate, jet_base, real_power
from .models import GB2D, GKP, parse_p
from .spectral.grid import Field2D, GridSpec


class KinematicError(ValueError):
    """Parameters admit no decaying real line soliton."""


class BoxTooSmallError(ValueError):
    """The soliton tail at the box edge exceeds the tolerance."""


@dataclass(frozen=True)
class SolitonParams:
    kind: str
    p: Fraction
    mu: float
    nu: float
    sigma2: int = 1
    gb_sign: Optional[int] = None

    def __post_init__(self):
        if self.kind not in (GKP, GB2D):
            raise ValueError(f"unknown model {self.kind!r}")
        object.__setattr__(self, "p", parse_p(self.p))
        if self.p is None:
            raise ValueError("a soliton needs a numeric p")
        if self.sigma2 not in (1, -1):
            raise ValueError("sigma2 must be +1 or -1")
        if self.kind == GB2D and self.gb_sign not in (1, -1):
            raise ValueError("gb_sign must be +1 or -1 for the Boussinesq model")

    @property
    def kappa(self) -> float:
        if self.kind == GKP:
            return self.nu - self.mu ** 2 * self.sigma2
        return self.nu ** 2 - self.mu ** 2 * self.sigma2 - 1

    @property
    def theta(self) -> float:
        return math.atan(self.mu)

    @property
    def k_norm(self) -> float:
        return math.sqrt(1 + self.mu ** 2)

    @property
    def speed(self) -> float:
        return self.nu / self.k_norm

    def model_descriptor(self) -> dict:
        d = {"model": self.kind, "p": str(self.p), "sigma2": self.sigma2}
        if self.kind == GB2D:
            d["gb_sign"] = self.gb_sign
        return d


@dataclass(frozen=True)
class KinematicCheck:
    ok: bool
    inequality: str
    margin: float
    reason: str = ""

    def __bool__(self):
        return self.ok


def _odd_over_odd(p: Fraction) -> bool:
    return p.numerator % 2 == 1 and p.denominator % 2 == 1


def validate_kinematics(params: SolitonParams) -> KinematicCheck:
    """Strict kinematic inequality plus the admissibility of ``p``."""
    mu, nu, s2 = params.mu, params.nu, params.sigma2
    if params.kind == GKP:
        lhs, rhs, rel = nu, s2 * mu ** 2, ">"
        text = f"nu > sgn(sigma^2) mu^2: {nu!r} > {rhs!r}"
    elif params.gb_sign == 1:
        lhs, rhs, rel = nu ** 2, s2 * mu ** 2 + 1, ">"
        text = f"nu^2 > sgn(sigma^2) mu^2 + 1: {lhs!r} > {rhs!r}"
    else:
        lhs, rhs, rel = nu ** 2, s2 * mu ** 2 + 1, "<"
        text = f"nu^2 < sgn(sigma^2) mu^2 + 1: {lhs!r} < {rhs!r}"
    margin = (lhs - rhs) if rel == ">" else (rhs - lhs)
    if not margin > 0:
        return KinematicCheck(False, text, margin, "kinematic condition violated")
    if params.p <= 0:
        return KinematicCheck(False, text, margin, "p must be positive for a decaying profile")
    if params.kind == GB2D and params.gb_sign == -1 and not _odd_over_odd(params.p):
        return KinematicCheck(
            False, text, margin,
            f"for s = -1 the amplitude is negative, so p = a/b needs a and b odd (p = {params.p})")
    return KinematicCheck(True, text, margin)


@dataclass(frozen=True)
class SolitonProfile:
    A: float
    B: float
    p: Fraction

    @property
    def m(self) -> float:
        return 2.0 / float(self.p)

    @property
    def A_pow_p(self) -> float:
        return float(real_power(self.A, self.p))


def build_profile(params: SolitonParams) -> SolitonProfile:
    chk = validate_kinematics(params)
    if not chk:
        raise KinematicError(f"{chk.reason}: {chk.inequality} (margin {chk.margin:.6g})")
    p, k = params.p, params.kappa
    pf = float(p)
    if params.kind == GKP:
        ap = k * (pf + 1) * (pf + 2) / 2
        B = pf / 2 * math.sqrt(k)
    else:
        ap = k * (pf + 2) / 2
        B = pf / 2 * math.sqrt(params.gb_sign * k)
    A = math.copysign(abs(ap) ** (1 / pf), ap)
    return SolitonProfile(A, B, p)


def printed_profile(params: SolitonParams) -> SolitonProfile:
    """Amplitude and width rate as printed with the closed-form solutions."""
    p, k = float(params.p), params.kappa
    if params.kind == GKP:
        return SolitonProfile((2 * (p + 2) * (p + 1) * k) ** (1 / p),
                              0.5 * p * (p + 1) * (p + 2) * math.sqrt(k), params.p)
    ap = 0.5 * (p + 2) * k
    return SolitonProfile(math.copysign(abs(ap) ** (1 / p), ap),
                          0.5 * p * (p + 2) * math.sqrt(params.gb_sign * k), params.p)


# ----------------------------------------------------------------------------
# closed-form jets


def _sech_tanh(z):
    z = np.asarray(z, dtype=float)
    e = np.exp(-2 * np.abs(z))
    sech = 2 * np.exp(-np.abs(z)) / (1 + e)
    tanh = np.sign(z) * (1 - e) / (1 + e)
    return sech, tanh


def profile_jets(profile: SolitonProfile, xi) -> Tuple[np.ndarray, ...]:
    """``(U, U', U'', U''', U^p)`` evaluated in closed form."""
    A, B, m = profile.A, profile.B, profile.m
    S, T = _sech_tanh(B * np.asarray(xi, dtype=float))
    Sm = S ** m
    U0 = A * Sm
    U1 = -m * B * A * Sm * T
    U2 = m * B ** 2 * A * Sm * (m * T ** 2 - S ** 2)
    U3 = m * B ** 3 * A * Sm * T * ((3 * m + 2) * S ** 2 - m ** 2 * T ** 2)
    Up = profile.A_pow_p * S ** 2
    return U0, U1, U2, U3, Up


def ode_terms(params: SolitonParams, profile: SolitonProfile, xi):
    U0, U1, U2, U3, Up = profile_jets(profile, xi)
    if params.kind == GKP:
        k1 = params.sigma2 * params.mu ** 2 - params.nu
        return k1 * U1, Up * U1, U3
    k1 = 1 + params.sigma2 * params.mu ** 2 - params.nu ** 2
    return k1 * U1, (float(params.p) + 1) * Up * U1, params.gb_sign * U3


def ode_residual(params: SolitonParams, profile: SolitonProfile, xi):
    """Signed left side of the third-order travelling-wave ODE."""
    a, b, c = ode_terms(params, profile, xi)
    return a + b + c


def ode_residual_scale(params: SolitonParams, profile: SolitonProfile, xi) -> float:
    """Largest single term magnitude, for relative tolerances."""
    return float(max(np.max(np.abs(t)) for t in ode_terms(params, profile, xi)))


def _jet_env(params: SolitonParams, profile: SolitonProfile, xi) -> Dict:
    U0, U1, U2, _, _ = profile_jets(profile, xi)
    env = {jet_base("U", (XI,) * k): v for k, v in enumerate((U0, U1, U2))}
    env.update({"mu": params.mu, "nu": params.nu, "sigma2": params.sigma2,
                "gbs": params.gb_sign if params.gb_sign is not None else 1})
    return env


def first_integral_values(params: SolitonParams, profile: SolitonProfile, xi):
    """``(C1, C2)`` from the published first integrals evaluated on the profile."""
    pair = published_first_integrals(params.kind)
    env = _jet_env(params, profile, xi)
    return (evaluate(pair.FI1, env, params.p), evaluate(pair.FI2, env, params.p))


_DENSITY_LAWS = {
    GKP: ("gkp-conslaw2", "gkp-conslaw3", "gkp-conslaw1"),
    GB2D: ("gb-conslaw2", "gb-conslaw3", "gb-conslaw1"),
}


def density_expressions(kind: str):
    """Travelling-wave images of the x-momentum, y-momentum and energy densities."""
    reg = registry(kind)
    return tuple(travelling_wave(reg.conslaw(n).T) for n in _DENSITY_LAWS[kind])


def densities(params: SolitonParams, profile: SolitonProfile, xi):
    """``(px, py, e)`` from the registered conserved densities."""
    env = _jet_env(params, profile, xi)
    shape = np.shape(xi)
    return tuple(np.broadcast_to(evaluate(e, env, params.p), shape).astype(float)
                 for e in density_expressions(params.kind))


def printed_densities(params: SolitonParams, xi):
    """The closed-form density formulas as printed, for comparison only."""
    p, k, nu, mu = float(params.p), params.kappa, params.nu, params.mu
    xi = np.asarray(xi, dtype=float)
    if params.kind == GKP:
        q = (p + 1) * (p + 2)
        z = 0.5 * p * q * math.sqrt(k) * xi
        S, T = _sech_tanh(z)
        base = (0.5 * q * k) ** (1 + 2 / p) * S ** (4 / p)
        return base, mu * base, base * ((q + 1 / q) * T ** 2 - q * nu / k)
    q = p + 2
    sk = params.gb_sign * k
    z = 0.5 * p * q * math.sqrt(sk) * xi
    S, T = _sech_tanh(z)
    amp = abs(0.5 * q * k)
    px = -nu * amp ** (1 / p) * S ** (4 / p)
    py = -mu * nu * amp ** (1 + 2 / p) * S ** (4 / p)
    e = -amp ** (1 + 2 / p) * S ** (4 / p) * ((q + 1 / q) * T ** 2 - 2 * q * nu ** 2 / k)
    return px, py, e


# ----------------------------------------------------------------------------
# grid sampling


def _wrapped_xi(params: SolitonParams, grid: GridSpec, t: float):
    X, Y = grid.mesh()
    xi = X + params.mu * Y - params.nu * t
    return np.mod(xi + grid.Lx / 2, grid.Lx) - grid.Lx / 2


def tail_magnitude(params: SolitonParams, profile: SolitonProfile, grid: GridSpec) -> float:
    """``|U|/|A|`` at the periodic seam, half a box from the crest along x."""
    S, _ = _sech_tanh(profile.B * grid.Lx / 2)
    return float(S ** profile.m)


def _check_tail(params, profile, grid, tail_eps):
    tail = tail_magnitude(params, profile, grid)
    if tail > tail_eps:
        need = 2 * math.acosh(tail_eps ** (-1 / profile.m)) / profile.B if tail_eps > 0 else math.inf
        raise BoxTooSmallError(
            f"soliton tail at the box edge is {tail:.3e} of the amplitude (> {tail_eps:.1e}); "
            f"use Lx >= {need:.4g}")
    return tail


def sample_field(params: SolitonParams, grid: GridSpec, t: float = 0.0,
                 tail_eps: float = 1e-10, profile: Optional[SolitonProfile] = None) -> Field2D:
    """``u`` at the grid nodes, with ``xi`` wrapped periodically in x."""
    profile = profile or build_profile(params)
    tail = _check_tail(params, profile, grid, tail_eps)
    U0 = profile_jets(profile, _wrapped_xi(params, grid, t))[0]
    period = params.mu * grid.Ly / grid.Lx
    meta = dict(params.model_descriptor())
    m = float(np.mean(U0))
    meta.update({"mu": params.mu, "nu": params.nu, "A": profile.A, "B": profile.B,
                 "tail": tail, "y_periodic": abs(period - round(period)) < 1e-12,
                 "vy_offset": params.mu * m, "vt_offset": -params.nu * m})
    return Field2D(grid, U0, t, meta)


def sample_rate(params: SolitonParams, grid: GridSpec, t: float = 0.0,
                profile: Optional[SolitonProfile] = None) -> Field2D:
    """``u_t = -nu U'`` at the grid nodes (the Boussinesq co-state)."""
    profile = profile or build_profile(params)
    U1 = profile_jets(profile, _wrapped_xi(params, grid, t))[1]
    return Field2D(grid, -params.nu * U1, t, {"field": "u_t"})


def profile_table(params: SolitonParams, profile: SolitonProfile, xi) -> np.ndarray:
    """Columns ``xi, U, px, py, e``."""
    xi = np.asarray(xi, dtype=float)
    U0 = profile_jets(profile, xi)[0]
    px, py, e = densities(params, profile, xi)
    return np.column_stack([xi, U0, px, py, e])
