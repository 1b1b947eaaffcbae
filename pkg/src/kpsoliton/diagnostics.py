"""Conserved quantities on sampled fields, scaling transforms and gB moment laws."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from .models import GB2D, GKP, ModelSpec
from .spectral.grid import Field2D, GridSpec
from .spectral.solver import SolverState, SpectralOps, admissible_power


# Uniform parts of v_y and v_t that u = v_x cannot see (the potential's gauge).
# A line soliton v = V(x + mu*y - nu*t) has v_y = mu*U, v_t = -nu*U, not their zero-mean parts.
VY_OFFSET = "vy_offset"
VT_OFFSET = "vt_offset"


class PotentialError(ValueError):
    """``u`` has an x-mean that varies with y, so ``v`` with ``v_x = u`` is not periodic-plus-ramp."""


@dataclass
class Potential:
    """``v = periodic(x, y) + slope * x + mean(y)``; only the periodic part is spectral."""
    vh: np.ndarray          # rfft2 of the periodic, zero-x-mean part
    slope: float            # uniform x-mean of u
    mean: np.ndarray        # x-mean of v per y-line (free; zero unless supplied)

    def values(self, ops: SpectralOps) -> np.ndarray:
        return ops.inv(self.vh) + self.slope * ops.grid.x[None, :] + self.mean[:, None]


def potential_parts(u: np.ndarray, ops: SpectralOps, tol: float = 1e-8,
                    mean: Optional[np.ndarray] = None) -> Potential:
    uh = ops.fwd(u)
    m = u.mean(axis=1)
    scale = max(float(np.max(np.abs(u))), 1e-300)
    if np.max(np.abs(m - m.mean())) > tol * scale:
        raise PotentialError(
            f"x-mean of u varies across y-lines by {np.ptp(m):.3e}; no periodic potential exists")
    mean = np.zeros(ops.grid.ny) if mean is None else np.asarray(mean, dtype=float)
    return Potential(ops.inv_dx(uh), float(m.mean()), mean)


def recover_potential(u: Field2D, tol: float = 1e-8) -> Field2D:
    """``v`` with ``v_x = u``: spectral antiderivative, zero x-mean, plus ``slope * x``.

    A y-independent x-mean of ``u`` (e.g. a line soliton) becomes the linear
    ramp recorded as ``meta['x_slope']``; a y-dependent one is rejected.
    """
    ops = SpectralOps(u.grid)
    pot = potential_parts(u.data, ops, tol)
    return Field2D(u.grid, pot.values(ops), u.time, {"x_slope": pot.slope})


@dataclass
class QuantitySet:
    time: float
    mass: float = 0.0
    energy: float = 0.0
    px: float = 0.0
    py: float = 0.0
    q: float = 0.0
    linf: float = 0.0
    f1: Optional[float] = None
    f2: Optional[float] = None
    a: Optional[float] = None
    a1: Optional[float] = None
    a2: Optional[float] = None
    a_dot: Optional[float] = None
    a1_dot: Optional[float] = None
    a2_dot: Optional[float] = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None and not math.isfinite(v):
                raise ValueError(f"{f.name} is not finite")

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


GKP_COLUMNS = ("time", "mass", "energy", "px", "py", "q_rotboost", "linf")
GB_COLUMNS = GKP_COLUMNS + ("a", "a1", "a2")


def csv_columns(kind: str):
    return GKP_COLUMNS if kind == GKP else GB_COLUMNS


def csv_row(qs: QuantitySet, kind: str) -> List[float]:
    row = [qs.time, qs.mass, qs.energy, qs.px, qs.py, qs.q, qs.linf]
    if kind == GB2D:
        row += [qs.a, qs.a1, qs.a2]
    return row


def _pow(u, e: Fraction):
    return admissible_power(u, Fraction(e))


def conserved_quantities(u: Field2D, model: ModelSpec, u_t: Optional[Field2D] = None,
                         v0=None, w0=None, tol: float = 1e-8) -> QuantitySet:
    """Box integrals (plain sums times ``dx dy``) of the registered densities.

    For gB, ``u_t`` is required; ``v0``/``w0`` are the x-means of ``v``/``v_t``.
    Uniform offsets of ``v_y`` and ``v_t`` are read from ``u.meta``.
    """
    if model.p is None or model.sigma2 is None:
        raise ValueError("quantities need numeric p and sigma2")
    g = u.grid
    ops = SpectralOps(g)
    p, s2 = model.p, model.sigma2
    w = g.dx * g.dy
    uu = u.data
    Y = g.y[:, None]
    pot = potential_parts(uu, ops, tol, v0)
    uh = ops.fwd(uu)
    u_x = ops.inv(ops.dx(uh))
    ky = 2 * math.pi * np.fft.fftfreq(g.ny, d=g.dy)
    v_y = ops.inv(1j * ops.KY * pot.vh) + np.real(np.fft.ifft(1j * ky * np.fft.fft(pot.mean)))[:, None]
    v_y = v_y + float(u.meta.get(VY_OFFSET, 0.0))
    mass = float(np.sum(uu * uu) * w)
    linf = float(np.max(np.abs(uu))) if uu.size else 0.0
    t = u.time
    if model.kind == GKP:
        e = 0.5 * u_x ** 2 - _pow(uu, p + 2) / ((p + 1) * (p + 2)) - 0.5 * s2 * v_y ** 2
        energy = float(np.sum(e) * w)
        px = 0.5 * mass
        py = float(np.sum(0.5 * uu * v_y) * w)
        q = float(np.sum(0.5 * Y * uu * uu - s2 * t * uu * v_y) * w)
        # boundary fluxes: x-edges cancel by periodicity; the y-edge jump of y*v_y survives
        f1 = 0.0
        f2 = float(s2 * g.Ly * np.sum(v_y[0]) * g.dx)
        return QuantitySet(t, mass, energy, px, py, q, linf, f1=f1, f2=f2)
    if u_t is None:
        raise ValueError("the Boussinesq quantities need u_t")
    if u_t.grid != g:
        raise ValueError("u and u_t grids differ")
    wpot = potential_parts(u_t.data, ops, tol, w0)
    v = pot.values(ops)
    v_t = wpot.values(ops) + float(u.meta.get(VT_OFFSET, 0.0))
    sgn = model.gb_sign
    e = 0.5 * (v_t ** 2 - sgn * u_x ** 2 + uu ** 2 + s2 * v_y ** 2) + _pow(uu, p + 2) / (p + 2)
    energy = float(np.sum(e) * w)
    px = float(np.sum(uu * v_t) * w)
    py = float(np.sum(v_y * v_t) * w)
    q = float(np.sum(Y * e + s2 * t * v_y * v_t) * w)
    mom = [float(np.sum(Y ** n * v) * w) for n in range(3)]
    rate = [float(np.sum(Y ** n * v_t) * w) for n in range(3)]
    return QuantitySet(t, mass, energy, px, py, q, linf, a=mom[0], a1=mom[1], a2=mom[2],
                       a_dot=rate[0], a1_dot=rate[1], a2_dot=rate[2])


def state_quantities(st: SolverState) -> QuantitySet:
    u = Field2D(st.grid, st.u(), st.time, dict(st.gauge))
    if st.model.kind == GKP:
        return conserved_quantities(u, st.model)
    ut = Field2D(st.grid, st.u_t(), st.time)
    return conserved_quantities(u, st.model, ut, st.v0(), st.w0())


# ----------------------------------------------------------------------------
# scaling


def _scaled_gauge(meta: dict, fy: float, ft: float) -> dict:
    out = dict(meta)
    if VY_OFFSET in out:
        out[VY_OFFSET] = out[VY_OFFSET] * fy
    if VT_OFFSET in out:
        out[VT_OFFSET] = out[VT_OFFSET] * ft
    return out


def apply_scaling(u: Field2D, eps: float, p, model: ModelSpec,
                  u_t: Optional[Field2D] = None):
    """Push ``u`` through the scaling group; returns the new field (and rate for gB).

    gKP: ``(x, y, t, v) -> (e^eps x, e^{2eps} y, e^{3eps} t, e^{(1-2/p)eps} v)``
    so ``u -> e^{-2 eps/p} u``.  gB (p = 1 only): the flow of
    ``x d_x + 2y d_y + 2t d_t - (x + v) d_v`` gives
    ``u -> e^{-2eps} u - (1 - e^{-2eps})/2`` and ``u_t -> e^{-4eps} u_t``.
    """
    p = Fraction(p)
    grid = u.grid.scaled(math.exp(eps), math.exp(2 * eps))
    if model.kind == GKP:
        meta = _scaled_gauge(u.meta, math.exp((-1 - 2 / float(p)) * eps), 1.0)
        return Field2D(grid, math.exp(-2 * eps / float(p)) * u.data, u.time * math.exp(3 * eps), meta)
    if p != 1:
        raise ValueError("the Boussinesq scaling symmetry exists only for p = 1")
    a = math.exp(-2 * eps)
    meta = _scaled_gauge(u.meta, math.exp(-3 * eps), math.exp(-3 * eps))
    new_u = Field2D(grid, a * u.data - 0.5 * (1 - a), u.time * math.exp(2 * eps), meta)
    if u_t is None:
        return new_u
    return new_u, Field2D(grid, a * a * u_t.data, new_u.time, dict(u_t.meta))


# ----------------------------------------------------------------------------
# drift and moment laws


DEFAULT_TOL = {"mass": 1e-6, "px": 1e-6, "energy": 1e-5, "py": 1e-5, "q_rotboost": 1e-5}
GB_CONSERVED = ("energy", "px", "py")
GKP_CONSERVED = ("mass", "energy", "px", "py")
# y-weighted densities pick up a flux through the y-seam of a periodic box
# unless the field vanishes there, so the rotation-boost / boost momentum is
# reported but does not enter the verdict.
INFORMATIONAL = ("q_rotboost",)


def drift_report(series: Dict[str, Sequence[float]], kind: str,
                 tol: Optional[Dict[str, float]] = None) -> Dict[str, dict]:
    """``{quantity: {drift_rel, tol, pass}}`` for the conserved columns of a series.

    Quantities that start at zero are measured against the largest of
    ``|mass|``, ``|energy|`` and 1.  Informational columns carry ``pass: None``.
    """
    tol = dict(DEFAULT_TOL, **(tol or {}))
    names = (GKP_CONSERVED if kind == GKP else GB_CONSERVED) + INFORMATIONAL
    ref = max(abs(series["mass"][0]), abs(series["energy"][0]), 1.0)
    out = {}
    for name in names:
        vals = np.asarray(series[name], dtype=float)
        den = abs(vals[0]) if abs(vals[0]) > 1e-12 * ref else ref
        drift = float(np.max(np.abs(vals - vals[0])) / den)
        verdict = None if name in INFORMATIONAL else drift < tol[name]
        out[name] = {"drift_rel": drift, "tol": tol[name], "pass": verdict}
    return out


@dataclass(frozen=True)
class MomentReport:
    samples: int
    scale: float
    dev_a: float
    dev_a1: float
    dev_a2: float

    def ok(self, rel: float = 1e-4) -> bool:
        return max(self.dev_a, self.dev_a1, self.dev_a2) <= rel * self.scale

    def to_json(self) -> dict:
        d = asdict(self)
        d["rel_a"], d["rel_a1"], d["rel_a2"] = (x / self.scale if self.scale else 0.0
                                                for x in (self.dev_a, self.dev_a1, self.dev_a2))
        return d


def gb_moment_dynamics(times: Sequence[float], a: Sequence[float], a1: Sequence[float],
                       a2: Sequence[float], sigma2: int) -> MomentReport:
    """Centered second differences of the amplitude moments against ``0, 0, 2 sigma^2 A``.

    ``scale`` is ``max(2|A|, |A2''|)`` over the interior samples.
    """
    t = np.asarray(times, dtype=float)
    if t.size < 5:
        raise ValueError("need at least 5 samples")
    h = np.diff(t)
    if np.max(np.abs(h - h[0])) > 1e-9 * max(1.0, abs(h[0])):
        raise ValueError("samples must be uniformly spaced")
    h = h[0]
    arr = [np.asarray(x, dtype=float) for x in (a, a1, a2)]
    dd = [(x[2:] - 2 * x[1:-1] + x[:-2]) / h ** 2 for x in arr]
    A = arr[0][1:-1]
    scale = float(max(np.max(2 * np.abs(A)), np.max(np.abs(dd[2]))))
    return MomentReport(int(t.size), scale, float(np.max(np.abs(dd[0]))),
                        float(np.max(np.abs(dd[1]))),
                        float(np.max(np.abs(dd[2] - 2 * sigma2 * A))))
