"""Independent reference solutions used by the spectral and acceptance tests."""

import math

import numpy as np

from kpsoliton.models import make_model
from kpsoliton.spectral.grid import Field2D, GridSpec
from kpsoliton.spectral.solver import evolve, gb_safe_horizon, init_gb, init_gkp


def gkp_omega(kx, ky, sigma2):
    # exp(i(kx x + ky y - w t)) in u_t + u_xxx + sigma2 D_x^-1 u_yy = 0
    return -kx ** 3 + sigma2 * ky ** 2 / kx


def gb_omega_sq(kx, ky, sigma2, s):
    # u_tt = u_xx + s u_xxxx + sigma2 u_yy
    return kx ** 2 - s * kx ** 4 + sigma2 * ky ** 2


def _mode_grid(rng):
    n = 32
    return GridSpec(n, n, float(rng.uniform(6, 20)), float(rng.uniform(6, 20)))


def _random_mode(rng, grid):
    # keep |j| inside the 2/3-rule band so the mode is not truncated
    jmax = grid.nx // 3 - 1
    jx = int(rng.integers(1, jmax + 1)) * int(rng.choice([-1, 1]))
    jy = int(rng.integers(-jmax, jmax + 1))
    return 2 * math.pi * jx / grid.Lx, 2 * math.pi * jy / grid.Ly


def gkp_mode_error(rng, amp=1e-8, t_final=1.0):
    """Relative max error of a single small gKP Fourier mode after ``t_final``."""
    grid = _mode_grid(rng)
    kx, ky = _random_mode(rng, grid)
    s2 = int(rng.choice([1, -1]))
    p = int(rng.choice([1, 2]))
    X, Y = grid.mesh()
    u0 = amp * np.cos(kx * X + ky * Y)
    st = init_gkp(make_model("gkp", p, s2), Field2D(grid, u0))
    res = evolve(st, t_final, t_final, monitor=None, keep_snapshots=False)
    w = gkp_omega(kx, ky, s2)
    exact = amp * np.cos(kx * X + ky * Y - w * t_final)
    return float(np.max(np.abs(res.state.u() - exact)) / amp)


def gb_mode_error(rng, amp=1e-8, t_final=1.0):
    """Relative max error of a small gB mode: a travelling wave, or a standing
    growing mode where the branch is unstable."""
    grid = _mode_grid(rng)
    kx, ky = _random_mode(rng, grid)
    s2, s = int(rng.choice([1, -1])), int(rng.choice([1, -1]))
    # s=+1 is ill-posed: stop before the fastest retained mode grows by 1e3, else
    # the nonlinear harmonic of an unstable mode outgrows the mode itself
    t_final = min(t_final, gb_safe_horizon(grid, s2, s, digits=3))
    X, Y = grid.mesh()
    th = kx * X + ky * Y
    w2 = gb_omega_sq(kx, ky, s2, s)
    if w2 >= 0:
        w = math.sqrt(w2)
        u0, ut0 = amp * np.cos(th), amp * w * np.sin(th)
        exact, scale = amp * np.cos(th - w * t_final), amp
    else:
        g = math.sqrt(-w2)
        u0, ut0 = amp * np.cos(th), np.zeros_like(th)
        exact, scale = amp * math.cosh(g * t_final) * np.cos(th), amp * math.cosh(g * t_final)
    st = init_gb(make_model("gb2d", 1, s2, s), Field2D(grid, u0), Field2D(grid, ut0))
    res = evolve(st, t_final, t_final, monitor=None, keep_snapshots=False)
    return float(np.max(np.abs(res.state.u() - exact)) / scale)
