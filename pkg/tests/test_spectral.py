import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kpsoliton.models import make_model
from kpsoliton.soliton import SolitonParams, sample_field, sample_rate
from kpsoliton.spectral.grid import MAGIC, Field2D, GridSpec, read_field, write_field
from kpsoliton.spectral.solver import (
    DEALIAS, IndeterminateSpeed, NegativeBaseError, SolverBlowup, SpectralOps, auto_dt, evolve,
    gb_safe_horizon, init_gb, init_gkp, measure_speed, step,
)

import oracles

GKP1 = make_model("gkp", 1, 1)


# grids and files -----------------------------------------------------------

@pytest.mark.parametrize("nx", [8, 48, 100])
def test_grid_requires_power_of_two(nx):
    with pytest.raises(ValueError):
        GridSpec(nx, 16, 1.0, 1.0)


def test_grid_wavenumbers():
    g = GridSpec(16, 32, 2 * math.pi, 4 * math.pi)
    np.testing.assert_allclose(g.kx(), np.arange(9))
    assert g.ky()[1] == pytest.approx(0.5) and g.ky()[-1] == pytest.approx(-0.5)
    assert g.x[0] == -math.pi and g.shape == (32, 16)


def test_field_rejects_nonfinite():
    g = GridSpec(16, 16, 1, 1)
    data = np.zeros(g.shape)
    data[3, 4] = np.nan
    with pytest.raises(ValueError):
        Field2D(g, data)


def test_field_file_round_trip(tmp_path):
    g = GridSpec(32, 16, 10.0, 5.0)
    data = np.random.default_rng(0).normal(size=g.shape)
    f = Field2D(g, data, 1.25, {"mu": 0.5})
    path = str(tmp_path / "u.bin")
    write_field(path, f, {"model": "gkp", "p": "1", "sigma2": 1, "gb_sign": None})
    raw = open(path, "rb").read()
    assert raw[:8] == MAGIC
    nl = raw.index(b"\n", 8)
    header = json.loads(raw[8:nl])
    assert header["nx"] == 32 and header["time"] == 1.25 and header["model"] == "gkp"
    assert len(raw) == nl + 1 + 8 * g.nx * g.ny
    back = read_field(path)
    assert back.grid == g and back.time == 1.25
    np.testing.assert_array_equal(back.data, data)
    assert back.meta["mu"] == 0.5 and back.meta["model"] == "gkp"


def test_field_file_rejects_truncation(tmp_path):
    g = GridSpec(16, 16, 1, 1)
    path = str(tmp_path / "u.bin")
    write_field(path, Field2D(g, np.ones(g.shape)))
    with open(path, "r+b") as fh:
        fh.truncate(100)
    with pytest.raises(ValueError):
        read_field(path)


# spectral operators -------------------------------------------------------

def test_dealias_mask_band():
    g = GridSpec(64, 32, 2 * math.pi, 2 * math.pi)
    ops = SpectralOps(g)
    kept = ops.KX[0][ops.mask[0]]
    assert kept.max() <= DEALIAS * g.nx / 2


@given(st.integers(1, 3), st.integers(-3, 3))
def test_power_hat_matches_pointwise_for_band_limited(jx, jy):
    g = GridSpec(32, 32, 2 * math.pi, 2 * math.pi)
    ops = SpectralOps(g)
    X, Y = g.mesh()
    u = np.cos(jx * X + jy * Y)
    np.testing.assert_allclose(ops.inv(ops.power_hat(u, 2)), u ** 2, atol=1e-13)


# steppers ------------------------------------------------------------------

def test_gkp_zero_is_fixed_point():
    g = GridSpec(32, 16, 10, 10)
    st0 = init_gkp(GKP1, Field2D(g, np.zeros(g.shape)))
    res = evolve(st0, 1.0, 0.5)
    assert np.all(res.state.u() == 0)
    assert all(q.mass == 0 and q.energy == 0 for q in res.series)


def test_gb_constant_state_is_fixed():
    g = GridSpec(32, 16, 10, 10)
    m = make_model("gb2d", 2, 1, -1)
    st0 = init_gb(m, Field2D(g, np.full(g.shape, 0.3)), Field2D(g, np.zeros(g.shape)))
    res = evolve(st0, 1.0, 1.0, monitor=None)
    np.testing.assert_allclose(res.state.u(), 0.3, atol=1e-15)


@pytest.mark.parametrize("seed", range(4))
def test_gkp_linear_mode(seed):
    assert oracles.gkp_mode_error(np.random.default_rng(seed)) < 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_gb_linear_mode(seed):
    assert oracles.gb_mode_error(np.random.default_rng(seed)) < 1e-6


def test_gkp_reversible():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    g = GridSpec(128, 16, 60, 10)
    st0 = init_gkp(GKP1, sample_field(params, g), dt=0.01)
    back = step(step(st0), -0.01)
    assert np.max(np.abs(back.u() - st0.u())) < 1e-8


def test_gb_reversible():
    params = SolitonParams("gb2d", 1, 0, 0.5, 1, -1)
    g = GridSpec(128, 16, 120, 10)
    m = make_model("gb2d", 1, 1, -1)
    st0 = init_gb(m, sample_field(params, g), sample_rate(params, g), dt=0.01)
    back = step(step(st0), -0.01)
    assert np.max(np.abs(back.u() - st0.u())) < 1e-8
    assert np.max(np.abs(back.u_t() - st0.u_t())) < 1e-8


def test_gkp_soliton_translation():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    g = GridSpec(256, 16, 60, 10)
    res = evolve(init_gkp(GKP1, sample_field(params, g)), 2.0, 0.5, monitor=None)
    sp = measure_speed(res.snapshots)
    assert sp.c == pytest.approx(1.0, rel=1e-3)
    exact = sample_field(params, g, 2.0).data
    assert np.max(np.abs(res.state.u() - exact)) < 1e-4


def test_gkp_soliton_translation_per_step():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    g = GridSpec(256, 16, 60, 10)
    st0 = init_gkp(GKP1, sample_field(params, g), dt=0.02)
    st1 = step(st0)
    # same sub-grid interpolation applied to the exact solution one step later
    exact = measure_speed([sample_field(params, g, 0.0), sample_field(params, g, st0.dt)])
    assert measure_speed([st0.field(), st1.field()]).nu == pytest.approx(exact.nu, rel=1e-5)
    assert exact.nu == pytest.approx(params.nu, rel=1e-2)


def test_gb_positive_branch_soliton_short_horizon():
    # s=+1 is ill-posed; a short run still shows the exact speed sqrt(2)
    params = SolitonParams("gb2d", 1, 0, math.sqrt(2), 1, 1)
    g = GridSpec(128, 16, 60, 10)
    m = make_model("gb2d", 1, 1, 1)
    st0 = init_gb(m, sample_field(params, g), sample_rate(params, g), dt=0.005)
    res = evolve(st0, 0.5, 0.1, monitor=None)
    assert measure_speed(res.snapshots).c == pytest.approx(math.sqrt(2), rel=1e-2)


def test_gb_negative_branch_soliton():
    params = SolitonParams("gb2d", 1, 0, 0.5, 1, -1)
    g = GridSpec(256, 16, 120, 10)
    m = make_model("gb2d", 1, 1, -1)
    st0 = init_gb(m, sample_field(params, g), sample_rate(params, g))
    res = evolve(st0, 4.0, 1.0)
    exact = measure_speed([sample_field(params, g, f.time) for f in res.snapshots])
    assert measure_speed(res.snapshots).c == pytest.approx(exact.c, rel=1e-5)
    assert exact.c == pytest.approx(0.5, rel=1e-2)
    assert np.max(np.abs(res.state.u() - sample_field(params, g, 4.0).data)) < 1e-5
    e = [q.energy for q in res.series]
    assert abs(e[-1] - e[0]) < 1e-6 * abs(e[0])


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_gb_positive_branch_blows_up_eventually():
    g = GridSpec(64, 16, 10, 10)
    m = make_model("gb2d", 1, 1, 1)
    X, _ = g.mesh()
    u = Field2D(g, 0.1 * np.cos(2 * math.pi * X / g.Lx))
    st0 = init_gb(m, u, Field2D(g, np.zeros(g.shape)))
    assert math.isfinite(gb_safe_horizon(g, 1, 1))
    assert gb_safe_horizon(g, 1, -1) == math.inf
    with pytest.raises(SolverBlowup):
        evolve(st0, 50 * gb_safe_horizon(g, 1, 1), 50 * gb_safe_horizon(g, 1, 1), monitor=None)


def test_kx0_column_frozen_and_mass_conserved():
    mu = 1.0
    params = SolitonParams("gkp", 1, mu, 2.5, 1)
    g = GridSpec(128, 64, 40, 40)
    u = sample_field(params, g)
    st0 = init_gkp(GKP1, u)
    means = u.data.mean(axis=1)
    st1 = st0
    for _ in range(5):
        st1 = step(st1)
        assert np.array_equal(st1.uh[:, 0], st0.uh[:, 0])
        assert np.sum(st1.u()) * g.dx * g.dy == pytest.approx(np.sum(u.data) * g.dx * g.dy,
                                                               rel=1e-13)
    np.testing.assert_allclose(st1.u().mean(axis=1), means, rtol=1e-12)


def test_fractional_power_negative_base_rejected():
    g = GridSpec(32, 16, 10, 10)
    X, _ = g.mesh()
    u = Field2D(g, 0.5 * np.sin(2 * math.pi * X / g.Lx))
    st0 = init_gkp(make_model("gkp", "3/2", 1), u)
    with pytest.raises(NegativeBaseError):
        step(st0)


def test_auto_dt():
    g = GridSpec(512, 128, 80, 40)
    params = SolitonParams("gkp", 1, 0, 1, 1)
    u = sample_field(params, g)
    dt = auto_dt(GKP1, g, u.data)
    assert 0 < dt <= 0.02
    st0 = init_gkp(GKP1, u)
    assert st0.dt == dt and st0.dt_source == "auto"
    assert auto_dt(GKP1, g, np.zeros(g.shape)) == 0.02


def test_drift_converges_at_fourth_order():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    g = GridSpec(128, 16, 60, 10)
    u = sample_field(params, g)
    X, Y = g.mesh()
    bump = 0.3 * np.exp(-((X - 10) ** 2) / 4) * np.cos(2 * math.pi * Y / g.Ly)
    u = Field2D(g, u.data + bump - bump.mean(axis=1, keepdims=True), 0.0, u.meta)
    drifts = []
    for dt in (0.08, 0.04, 0.02):
        res = evolve(init_gkp(GKP1, u, dt=dt), 2.0, 2.0, keep_snapshots=False)
        m0, m1 = res.series[0].mass, res.series[-1].mass
        drifts.append(abs(m1 - m0) / m0)
    orders = [math.log2(a / b) for a, b in zip(drifts, drifts[1:])]
    assert min(orders) >= 3.5


def test_evolve_sample_times_and_validation():
    g = GridSpec(32, 16, 10, 10)
    st0 = init_gkp(GKP1, Field2D(g, np.zeros(g.shape)), dt=0.03)
    res = evolve(st0, 1.0, 0.25, monitor=None)
    assert [f.time for f in res.snapshots] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert res.state.dt == 0.03
    with pytest.raises(ValueError):
        evolve(res.state, 0.5, 0.1)


# speed measurement ---------------------------------------------------------

def test_measure_speed_exact_samples():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    g = GridSpec(256, 16, 60, 10)
    snaps = [sample_field(params, g, t) for t in (0.0, 1.0, 2.0)]
    assert measure_speed(snaps).c == pytest.approx(1.0, rel=1e-2)


def test_measure_speed_static_field():
    params = SolitonParams("gkp", 1, 0, 1, 1)
    g = GridSpec(128, 16, 60, 10)
    f = sample_field(params, g)
    later = replace(f.copy(), time=3.0)
    assert measure_speed([f, later]).c == 0


def test_measure_speed_tilted_negative_sigma():
    params = SolitonParams("gkp", 1, 1.0, 0.5, -1)
    g = GridSpec(128, 128, 60, 60)
    m = make_model("gkp", 1, -1)
    res = evolve(init_gkp(m, sample_field(params, g)), 1.0, 0.5, monitor=None)
    sp = measure_speed(res.snapshots)
    assert sp.theta == pytest.approx(math.pi / 4, abs=0.02)
    assert sp.c == pytest.approx(params.speed, rel=1e-2)


def test_measure_speed_needs_a_crest():
    g = GridSpec(32, 16, 10, 10)
    flat = Field2D(g, np.ones(g.shape))
    with pytest.raises(IndeterminateSpeed):
        measure_speed([flat, replace(flat.copy(), time=1.0)])
    with pytest.raises(IndeterminateSpeed):
        measure_speed([flat])
