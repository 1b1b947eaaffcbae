"""Integrating-factor RK4 pseudospectral steppers for gKP (u-form) and 2D gB."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.fft as sfft

from ..jetalgebra import real_power
from ..models import GB2D, GKP, ModelSpec
from .grid import Field2D, GridSpec

DEALIAS = 2.0 / 3.0


class SolverBlowup(RuntimeError):
    """Non-finite or runaway values during a step."""


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by ``SLTN_THREADS`` when set."""
    env = os.environ.get("SLTN_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"SLTN_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValueError("SLTN_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


class NegativeBaseError(SolverBlowup):
    """``u < 0`` where ``u**n`` has no real value."""


def admissible_power(u: np.ndarray, n: Fraction, rel: float = 1e-6) -> np.ndarray:
    """``u**n``; for even-denominator ``n`` round-off negatives down to ``-rel*max|u|`` count as 0."""
    if n.denominator % 2 == 0 and u.size:
        lo = float(np.min(u))
        if lo < 0:
            if lo < -rel * float(np.max(np.abs(u))):
                raise NegativeBaseError(f"u reaches {lo:.3e} < 0 but u^{n} needs u >= 0")
            u = np.maximum(u, 0.0)
    return real_power(u, n)


class SpectralOps:
    """Transforms, wavenumbers, masks and dealiased powers on one grid."""

    def __init__(self, grid: GridSpec, workers: Optional[int] = None):
        self.grid = grid
        self.workers = workers or fft_workers()
        self.KX, self.KY = grid.kgrid()
        jx = np.arange(grid.nx // 2 + 1)[None, :]
        jy = np.abs(np.fft.fftfreq(grid.ny, 1.0 / grid.ny))[:, None]
        self.mask = (jx <= DEALIAS * grid.nx / 2) & (jy <= DEALIAS * grid.ny / 2)
        self.kx_max = float(np.max(np.abs(self.KX) * self.mask[:1, :]))

    def fwd(self, u: np.ndarray) -> np.ndarray:
        return sfft.rfft2(u, workers=self.workers)

    def inv(self, uh: np.ndarray) -> np.ndarray:
        return sfft.irfft2(uh, s=self.grid.shape, workers=self.workers)

    def truncate(self, u: np.ndarray) -> np.ndarray:
        return self.inv(self.fwd(u) * self.mask)

    def power_hat(self, u: np.ndarray, n: Fraction) -> np.ndarray:
        """Dealiased transform of ``u**n``; integer powers truncate after every product."""
        if n.denominator == 1 and n > 1:
            w = u
            for _ in range(int(n) - 2):
                w = self.truncate(w * u)
            return self.fwd(w * u) * self.mask
        return self.fwd(admissible_power(u, n)) * self.mask

    def dx(self, uh: np.ndarray, order: int = 1) -> np.ndarray:
        return (1j * self.KX) ** order * uh

    def inv_dx(self, uh: np.ndarray) -> np.ndarray:
        """x-antiderivative with the kx = 0 column set to zero."""
        out = np.zeros_like(uh)
        nz = self.KX[0] != 0
        out[:, nz] = uh[:, nz] / (1j * self.KX[:, nz])
        return out


def _coerce_model(model: ModelSpec) -> ModelSpec:
    if model.p is None:
        raise ValueError("the solver needs a numeric p")
    if model.sigma2 is None:
        raise ValueError("the solver needs sigma2 = +1 or -1")
    if model.kind == GB2D and model.gb_sign is None:
        raise ValueError("the solver needs gb_sign for the Boussinesq model")
    return model


def gkp_symbol(grid: GridSpec, sigma2: int) -> np.ndarray:
    """``L`` with ``u_hat_t = L u_hat`` for the linear gKP operator; zero on ``kx = 0``."""
    KX, KY = grid.kgrid()
    L = np.zeros(np.broadcast_shapes(KX.shape, KY.shape), dtype=complex)
    nz = np.broadcast_to(KX != 0, L.shape)
    KXb = np.broadcast_to(KX, L.shape)
    KYb = np.broadcast_to(KY, L.shape)
    L[nz] = 1j * KXb[nz] ** 3 - 1j * sigma2 * KYb[nz] ** 2 / KXb[nz]
    return L


def gkp_frequency(kx, ky, sigma2: int):
    """Plane-wave frequency, ``exp(i(kx x + ky y - omega t))``."""
    return -kx ** 3 + sigma2 * ky ** 2 / kx


def gb_omega2(kx, ky, sigma2: int, gb_sign: int):
    """``omega^2`` of the linear gB operator; negative values grow."""
    return kx ** 2 - gb_sign * kx ** 4 + sigma2 * ky ** 2


def _wave_propagator(w2: np.ndarray, h: float):
    """Entries ``(c, s_over, s_times)`` of ``[[c, s_over], [s_times, c]]`` for ``q'' = -w2 q``."""
    w2 = np.asarray(w2, dtype=float)
    c = np.ones_like(w2)
    so = np.full_like(w2, h)
    st = np.zeros_like(w2)
    pos, neg = w2 > 0, w2 < 0
    w = np.sqrt(w2[pos])
    c[pos], so[pos], st[pos] = np.cos(w * h), np.sin(w * h) / w, -w * np.sin(w * h)
    g = np.sqrt(-w2[neg])
    c[neg], so[neg], st[neg] = np.cosh(g * h), np.sinh(g * h) / g, g * np.sinh(g * h)
    return c, so, st


@dataclass
class SolverState:
    model: ModelSpec
    grid: GridSpec
    uh: np.ndarray
    wh: Optional[np.ndarray] = None       # gB: transform of u_t
    v0h: Optional[np.ndarray] = None      # gB: 1D transform of the x-mean of v
    w0h: Optional[np.ndarray] = None      # gB: 1D transform of the x-mean of v_t
    dt: float = 0.0
    time: float = 0.0
    steps: int = 0
    zero_mode_policy: str = "frozen-kx0"
    dealias: float = DEALIAS
    dt_source: str = "explicit"
    gauge: dict = field(default_factory=dict)   # uniform v_y / v_t offsets, see diagnostics

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def ops(self) -> SpectralOps:
        o = getattr(self, "_ops", None)
        if o is None or o.grid != self.grid:
            o = SpectralOps(self.grid)
            object.__setattr__(self, "_ops", o)
        return o

    def u(self) -> np.ndarray:
        return self.ops.inv(self.uh)

    def u_t(self) -> np.ndarray:
        return self.ops.inv(self.wh)

    def v0(self) -> np.ndarray:
        return np.real(sfft.ifft(self.v0h))

    def w0(self) -> np.ndarray:
        return np.real(sfft.ifft(self.w0h))

    def field(self) -> Field2D:
        meta = dict(self.model.descriptor())
        meta.update(self.gauge)
        meta.update({"dt": self.dt, "steps": self.steps})
        return Field2D(self.grid, self.u(), self.time, meta)

    def copy(self) -> "SolverState":
        cp = lambda a: None if a is None else a.copy()
        return replace(self, uh=self.uh.copy(), wh=cp(self.wh), v0h=cp(self.v0h), w0h=cp(self.w0h))


# ----------------------------------------------------------------------------
# dt heuristics


def auto_dt(model: ModelSpec, grid: GridSpec, u: np.ndarray, cfl: float = 0.25,
            dt_max: float = 0.02) -> float:
    """Step limited by the explicit nonlinear term; the linear part is exact.

    ``cfl / (kx_max_dealiased * a)`` with ``a = max|u|^p`` for gKP and
    ``a = sqrt(1 + (p+1) max|u|^p)`` for gB, capped at ``dt_max``.
    """
    ops = SpectralOps(grid, workers=1)
    umax = float(np.max(np.abs(u))) if u.size else 0.0
    up = umax ** float(model.p)
    if model.kind == GKP:
        rate = ops.kx_max * up
    else:
        rate = ops.kx_max * math.sqrt(1 + (float(model.p) + 1) * up)
    return dt_max if rate == 0 else min(dt_max, cfl / rate)


def gb_growth_rate(grid: GridSpec, sigma2: int, gb_sign: int) -> float:
    """Largest linear growth rate among retained (dealiased) modes; zero when stable."""
    ops = SpectralOps(grid, workers=1)
    w2 = gb_omega2(ops.KX, ops.KY, sigma2, gb_sign)
    w2 = np.where(ops.mask, w2, 0.0)
    return float(math.sqrt(max(0.0, -float(np.min(w2)))))


def gb_safe_horizon(grid: GridSpec, sigma2: int, gb_sign: int, digits: float = 10.0) -> float:
    """Run length over which the fastest retained mode grows by ``10**digits``."""
    g = gb_growth_rate(grid, sigma2, gb_sign)
    return math.inf if g == 0 else digits * math.log(10) / g


def linear_dt_bound(model: ModelSpec, grid: GridSpec, factor: float = 0.4) -> float:
    """``factor / max|L(k)|``, the purely linear stability scale (advisory only)."""
    if model.kind == GKP:
        return factor / float(np.max(np.abs(gkp_symbol(grid, model.sigma2))))
    KX, KY = grid.kgrid()
    return factor / float(np.sqrt(np.max(np.abs(gb_omega2(KX, KY, model.sigma2, model.gb_sign)))))


# ----------------------------------------------------------------------------
# state construction


def _gauge(u: Field2D) -> dict:
    return {k: u.meta[k] for k in ("vy_offset", "vt_offset") if k in u.meta}


def init_gkp(model: ModelSpec, u: Field2D, dt="auto", cfl: float = 0.25) -> SolverState:
    model = _coerce_model(model)
    if model.kind != GKP:
        raise ValueError("init_gkp needs a gKP model")
    ops = SpectralOps(u.grid)
    src = "explicit"
    if dt == "auto":
        dt, src = auto_dt(model, u.grid, u.data, cfl), "auto"
    st = SolverState(model, u.grid, ops.fwd(u.data), dt=float(dt), time=u.time, dt_source=src,
                     gauge=_gauge(u))
    object.__setattr__(st, "_ops", ops)
    return st


def init_gb(model: ModelSpec, u: Field2D, u_t: Field2D, v0=None, w0=None, dt="auto",
            cfl: float = 0.25) -> SolverState:
    """gB state from ``u``, ``u_t`` and optional x-means ``v0(y)``, ``w0(y)`` of ``v``, ``v_t``."""
    model = _coerce_model(model)
    if model.kind != GB2D:
        raise ValueError("init_gb needs a Boussinesq model")
    if u_t.grid != u.grid:
        raise ValueError("u and u_t grids differ")
    ops = SpectralOps(u.grid)
    ny = u.grid.ny
    v0 = np.zeros(ny) if v0 is None else np.asarray(v0, dtype=float)
    w0 = np.zeros(ny) if w0 is None else np.asarray(w0, dtype=float)
    if v0.shape != (ny,) or w0.shape != (ny,):
        raise ValueError("zero modes must have length ny")
    src = "explicit"
    if dt == "auto":
        dt, src = auto_dt(model, u.grid, u.data, cfl), "auto"
    st = SolverState(model, u.grid, ops.fwd(u.data) * ops.mask, ops.fwd(u_t.data) * ops.mask,
                     sfft.fft(v0), sfft.fft(w0), dt=float(dt), time=u.time,
                     zero_mode_policy="wave-kx0", dt_source=src, gauge=_gauge(u))
    object.__setattr__(st, "_ops", ops)
    return st


def gb_state_from_potential(model: ModelSpec, v: Field2D, v_t: Field2D, dt="auto") -> SolverState:
    """Build a gB state from the potential ``v`` and its rate, keeping their x-means."""
    ops = SpectralOps(v.grid)
    u = ops.inv(ops.dx(ops.fwd(v.data)))
    ut = ops.inv(ops.dx(ops.fwd(v_t.data)))
    return init_gb(model, Field2D(v.grid, u, v.time), Field2D(v.grid, ut, v.time),
                   v.data.mean(axis=1), v_t.data.mean(axis=1), dt)


# ----------------------------------------------------------------------------
# steppers


def _check_finite(st: SolverState, *arrays):
    for a in arrays:
        if a is not None and not np.all(np.isfinite(a)):
            raise SolverBlowup(
                f"non-finite values at t={st.time:.6g} after {st.steps} steps (dt={st.dt:.3g}); "
                "reduce dt or check the linear stability of this branch")


def _gkp_factors(st: SolverState, h: float):
    key = ("gkp", h)
    cache = getattr(st, "_factors", None)
    if cache is None or cache[0] != key:
        L = gkp_symbol(st.grid, st.model.sigma2)
        cache = (key, np.exp(L * h), np.exp(L * h / 2))
        object.__setattr__(st, "_factors", cache)
    return cache[1], cache[2]


def step_gkp(st: SolverState, h: Optional[float] = None) -> SolverState:
    """One integrating-factor RK4 step; ``h`` may be negative for reversal tests."""
    h = st.dt if h is None else h
    ops, p = st.ops, st.model.p
    c = -1j * ops.KX / (float(p) + 1)

    def N(vh):
        return c * ops.power_hat(ops.inv(vh), p + 1)

    E, E2 = _gkp_factors(st, h)
    u = st.uh
    a = h * N(u)
    b = h * N(E2 * (u + a / 2))
    cc = h * N(E2 * u + b / 2)
    d = h * N(E * u + E2 * cc)
    new = E * u + (E * a + 2 * E2 * (b + cc) + d) / 6
    _check_finite(st, new)
    out = replace(st, uh=new, time=st.time + h, steps=st.steps + 1)
    for k in ("_ops", "_factors"):
        if hasattr(st, k):
            object.__setattr__(out, k, getattr(st, k))
    return out


def _gb_factors(st: SolverState, h: float):
    key = ("gb", h)
    cache = getattr(st, "_factors", None)
    if cache is None or cache[0] != key:
        KX, KY = st.ops.KX, st.ops.KY
        w2 = np.broadcast_to(gb_omega2(KX, KY, st.model.sigma2, st.model.gb_sign), st.uh.shape)
        full = _wave_propagator(w2, h)
        half = _wave_propagator(w2, h / 2)
        ky1 = 2 * math.pi * np.fft.fftfreq(st.grid.ny, d=st.grid.dy)
        zero = _wave_propagator(st.model.sigma2 * ky1 ** 2, h)
        cache = (key, full, half, zero)
        object.__setattr__(st, "_factors", cache)
    return cache[1], cache[2], cache[3]


def _apply(M, q, w):
    c, so, stt = M
    return c * q + so * w, stt * q + c * w


def step_gb(st: SolverState, h: Optional[float] = None) -> SolverState:
    """One integrating-factor RK4 step of ``(u_hat, u_t_hat)`` plus the exact zero modes."""
    h = st.dt if h is None else h
    ops, p = st.ops, st.model.p
    k2 = -ops.KX ** 2

    def N(qh):
        return k2 * ops.power_hat(ops.inv(qh), p + 1)

    E, E2, Z = _gb_factors(st, h)
    q, w = st.uh, st.wh
    # stage derivatives: (dq, dw) = (0, N(q)); only the w-slot carries a nonlinear term
    a = h * N(q)
    q1, w1 = _apply(E2, q, w + a / 2)
    b = h * N(q1)
    q2, w2 = _apply(E2, q, w)
    q2, w2 = q2, w2 + b / 2
    c = h * N(q2)
    q3, w3 = _apply(E, q, w)
    cq, cw = _apply(E2, 0 * q, c)
    q3, w3 = q3 + cq, w3 + cw
    d = h * N(q3)
    qe, we = _apply(E, q, w)
    aq, aw = _apply(E, 0 * q, a)
    bcq, bcw = _apply(E2, 0 * q, b + c)
    nq = (qe + (aq + 2 * bcq) / 6) * ops.mask
    nw = (we + (aw + 2 * bcw + d) / 6) * ops.mask
    v0, w0 = _apply(Z, st.v0h, st.w0h)
    _check_finite(st, nq, nw)
    out = replace(st, uh=nq, wh=nw, v0h=v0, w0h=w0, time=st.time + h, steps=st.steps + 1)
    for k in ("_ops", "_factors"):
        if hasattr(st, k):
            object.__setattr__(out, k, getattr(st, k))
    return out


def step(st: SolverState, h: Optional[float] = None) -> SolverState:
    return step_gkp(st, h) if st.model.kind == GKP else step_gb(st, h)


# ----------------------------------------------------------------------------
# driver


@dataclass
class EvolveResult:
    state: SolverState
    snapshots: List[Field2D] = field(default_factory=list)
    series: list = field(default_factory=list)
    rates: List[Field2D] = field(default_factory=list)


def _sample_times(t0: float, t_final: float, every: float) -> List[float]:
    n = int(math.floor((t_final - t0) / every + 1e-9))
    times = [t0 + k * every for k in range(n + 1)]
    if t_final - times[-1] > 1e-9 * max(1.0, abs(t_final)):
        times.append(t_final)
    return times


def evolve(st: SolverState, t_final: float, snapshot_every: float,
           monitor: Optional[Callable[[SolverState], object]] = "default",
           keep_snapshots: bool = True) -> EvolveResult:
    """Step to ``t_final``, sampling every ``snapshot_every`` time units.

    Each interval is split into equal steps no longer than ``st.dt``.  The
    ``monitor`` (conserved quantities by default) is applied at every sample.
    """
    if not t_final > st.time:
        raise ValueError("t_final must exceed the current time")
    if not snapshot_every > 0:
        raise ValueError("snapshot_every must be positive")
    if monitor == "default":
        from ..diagnostics import state_quantities as monitor
    res = EvolveResult(st)
    times = _sample_times(st.time, t_final, snapshot_every)
    kx0 = st.uh[:, 0].copy() if st.model.kind == GKP else None
    base_dt = st.dt

    def record(s: SolverState):
        if kx0 is not None and not np.array_equal(s.uh[:, 0], kx0):
            raise AssertionError("gKP x-mean per y-line changed")
        if keep_snapshots:
            res.snapshots.append(s.field())
            if s.wh is not None:
                res.rates.append(Field2D(s.grid, s.u_t(), s.time, {"field": "u_t"}))
        if monitor is not None:
            res.series.append(monitor(s))

    record(st)
    for t0, t1 in zip(times[:-1], times[1:]):
        n = max(1, int(math.ceil((t1 - t0) / base_dt - 1e-9)))
        h = (t1 - t0) / n
        if h != st.dt:
            st = replace(st, dt=h)
        for _ in range(n):
            st = step(st)
        st = replace(st, time=t1, dt=h)
        record(st)
    res.state = replace(st, dt=base_dt)
    return res


# ----------------------------------------------------------------------------
# speed measurement


class IndeterminateSpeed(ValueError):
    """No single coherent crest in the snapshots."""


@dataclass(frozen=True)
class SpeedMeasurement:
    c: float
    theta: float
    nu: float
    mu: float
    crest_rms: float


def _crest(f: Field2D, ratio: float = 5.0) -> Tuple[np.ndarray, np.ndarray]:
    u = f.data
    sgn = 1.0 if np.max(u) >= -np.min(u) else -1.0
    u = sgn * u
    mean = float(np.mean(np.abs(u)))
    if mean == 0 or float(np.max(u)) / mean < ratio:
        raise IndeterminateSpeed(f"no clear peak at t={f.time:.6g} (max/mean < {ratio})")
    g = f.grid
    j = np.argmax(u, axis=1)
    rows = np.arange(g.ny)
    um, u0, up = u[rows, (j - 1) % g.nx], u[rows, j], u[rows, (j + 1) % g.nx]
    den = um - 2 * u0 + up
    off = np.where(den != 0, 0.5 * (um - up) / np.where(den != 0, den, 1), 0.0)
    xs = g.x[j] + off * g.dx
    xs = np.unwrap(xs, period=g.Lx)
    return g.y, xs


def measure_speed(snapshots: List[Field2D], ratio: float = 5.0) -> SpeedMeasurement:
    """Speed and orientation of a single line crest from at least two snapshots."""
    if len(snapshots) < 2:
        raise IndeterminateSpeed("need at least two snapshots")
    ts, a, slopes, rms = [], [], [], []
    for f in snapshots:
        y, xs = _crest(f, ratio)
        b, a0 = np.polyfit(y, xs, 1)
        ts.append(f.time)
        a.append(a0)
        slopes.append(b)
        rms.append(float(np.sqrt(np.mean((xs - (a0 + b * y)) ** 2))))
    Lx = snapshots[0].grid.Lx
    a = np.unwrap(np.asarray(a), period=Lx)
    ts = np.asarray(ts)
    nu = float(np.polyfit(ts, a, 1)[0]) if np.ptp(ts) > 0 else 0.0
    mu = -float(np.mean(slopes))
    return SpeedMeasurement(nu / math.sqrt(1 + mu * mu), math.atan(mu), nu, mu, max(rms))
