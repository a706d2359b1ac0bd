import numpy as np
import pytest

from tpeskin import lagrangian as lg
from tpeskin import torus
from tpeskin.dynamics import RunConfig, simulate
from tpeskin.errors import ConfigError, FlowCrossingError
from tpeskin.torus import SpectralField


def sine_string(n, amp=0.3):
    s = -np.pi + 2 * np.pi * np.arange(n) / n
    return lg.StringConfig(s, s + amp * np.sin(s))


@pytest.fixture(scope="module")
def two_mode_run():
    return simulate(RunConfig(t_end=5.0, record_dt=0.05, snapshot_dt=0.05, dt_max=0.01))


@pytest.fixture(scope="module")
def constant_run():
    return simulate(RunConfig(initial={"preset": "constant", "value": 1.0}, K=2, t_end=1.0,
                              record_dt=0.25, snapshot_dt=0.25))


def test_string_config_validation():
    s = np.linspace(-np.pi, np.pi, 8, endpoint=False)
    with pytest.raises(ConfigError):
        lg.StringConfig(s, s[::-1])
    with pytest.raises(ConfigError):
        lg.StringConfig(s, s + 0.5 * np.r_[0, 0, 0, 0, 0, 0, 0, 3.0])


def test_identity_configuration_gives_unit_field():
    g = lg.f0_from_configuration(lg.identity_configuration(256), 512)
    np.testing.assert_allclose(g.samples, 1.0, rtol=1e-13)


def test_sine_string_spot_value_and_mass():
    # X0' F0(X0) = 1, so f0(X0(0)) = X0'(0) = 1.3
    g = lg.f0_from_configuration(sine_string(4096), 4096)
    i = int(np.argmin(np.abs(g.x)))
    assert g.x[i] == 0.0
    assert g.samples[i] == pytest.approx(1.3, rel=1e-6)
    for X0 in (sine_string(4096), lg.identity_configuration(4096)):
        F0 = 1.0 / lg.f0_from_configuration(X0, 1024).samples
        assert F0.sum() * 2 * np.pi / 1024 == pytest.approx(2 * np.pi, abs=1e-8)


@pytest.mark.parametrize("coeffs", [[1.0, 0.3], [1.0, 0.2 + 0.1j, 0.05], [0.7]])
def test_configuration_round_trip(coeffs):
    f = SpectralField.from_coeffs(coeffs, 8)
    X0 = lg.configuration_from_field(f, 2048)
    F = 1.0 / torus.to_grid(f, 4096).samples
    assert X0.period == pytest.approx(F.sum() * 2 * np.pi / 4096, rel=1e-13)
    np.testing.assert_allclose(X0.stretch(), f(0.5 * (X0.closed()[1][1:] + X0.closed()[1][:-1])), rtol=1e-5)


def test_constant_field_flow_is_identity(constant_run):
    seeds = torus.grid_nodes(64)
    flow = lg.advect_flow(constant_run, seeds)
    np.testing.assert_array_equal(flow.positions, np.broadcast_to(seeds, flow.positions.shape))
    X = lg.reconstruct_X(flow, lg.identity_configuration(64))
    assert all(np.array_equal(x.X, x.s) for x in X)


def test_two_mode_initial_velocities(two_mode_run):
    f0 = lg.field_at(two_mode_run, 0.0)
    v = lg._velocity(f0, np.array([0.0, np.pi / 2]))
    assert v[0] == pytest.approx(0.0, abs=1e-15)
    assert v[1] == pytest.approx(-0.6, abs=1e-15)


def test_field_interpolant_is_exact_at_snapshots(two_mode_run):
    for t, f in two_mode_run.snapshots[::17]:
        for kind in ("hermite", "linear"):
            np.testing.assert_array_equal(lg.field_at(two_mode_run, t, kind).coeffs, f.coeffs)


def test_hermite_interpolant_beats_linear(two_mode_run):
    coarse = simulate(RunConfig(t_end=1.0, record_dt=0.05, snapshot_dt=0.25, dt_max=0.01))
    ref = lg.field_at(two_mode_run, 0.6).coeffs
    err = {k: np.abs(lg.field_at(coarse, 0.6, k).coeffs - ref).max() for k in ("hermite", "linear")}
    assert err["hermite"] < err["linear"] / 50


def test_flow_preserves_order_and_period(two_mode_run):
    flow = lg.advect_flow(two_mode_run, torus.grid_nodes(2048))
    assert flow.times[0] == 0 and flow.times[-1] == 5.0
    assert np.all(np.diff(flow.positions, axis=1) > 0)
    assert np.all(flow.positions[:, -1] < flow.positions[:, 0] + 2 * np.pi)
    assert flow.wrap_error <= 1e-10


def test_flow_composition(two_mode_run):
    x = torus.grid_nodes(64)
    direct = lg.advect(two_mode_run, x, 0.0, 1.0, dt=0.01)
    mid = lg.advect(two_mode_run, x, 0.0, 0.37, dt=0.01)
    composed = lg.advect(two_mode_run, mid, 0.37, 1.0, dt=0.01)
    np.testing.assert_allclose(composed, direct, atol=1e-10)


def test_flow_crossing_detected():
    # a steep lone mode k = 16: one step of 0.5 overshoots and scrambles order,
    # while the default step keeps it
    tr = simulate(RunConfig(initial={"preset": "single_mode", "k": 16, "c": 0.45}, K=16,
                            t_end=0.5, record_dt=0.5, snapshot_dt=0.05))
    lg.advect_flow(tr, torus.grid_nodes(1024))
    with pytest.raises(FlowCrossingError):
        lg.advect_flow(tr, torus.grid_nodes(1024), dt=0.5)


def test_seeds_must_be_sorted(two_mode_run):
    with pytest.raises(ConfigError):
        lg.advect_flow(two_mode_run, np.array([0.5, 0.1]))


def test_advection_needs_initial_snapshot():
    tr = simulate(RunConfig(t_end=0.2, record_dt=0.1, snapshot_times=[0.1]))
    with pytest.raises(ConfigError):
        lg.advect_flow(tr, torus.grid_nodes(8))


def test_reconstruct_rejects_seed_mismatch(two_mode_run):
    flow = lg.advect_flow(two_mode_run, torus.grid_nodes(32), times=[0.0])
    with pytest.raises(ConfigError):
        lg.reconstruct_X(flow, sine_string(32))


def stretch_error(run, n):
    X0 = lg.configuration_from_field(run.initial, n)
    flow = lg.advect_flow(run, X0.X, times=[0.0, 1.0])
    return lg.check_stretch_consistency(lg.reconstruct_X(flow, X0), flow, run)


def test_stretch_identity_second_order(two_mode_run):
    e1, e2 = stretch_error(two_mode_run, 1024), stretch_error(two_mode_run, 2048)
    assert e2.status == "pass" and e2.worst <= 1e-3
    assert e1.worst / e2.worst == pytest.approx(4.0, rel=0.1)


def test_pushforward(two_mode_run):
    flow = lg.advect_flow(two_mode_run, torus.grid_nodes(256), times=[0.0, 0.5, 1.0])
    rep = lg.check_pushforward(flow, two_mode_run)
    assert rep.status == "pass" and rep.worst <= 1e-3


def test_pushforward_needs_uniform_seeds(two_mode_run):
    flow = lg.advect_flow(two_mode_run, torus.grid_nodes(64) + 0.01, times=[0.0])
    with pytest.raises(ConfigError):
        lg.check_pushforward(flow, two_mode_run)


def test_string_h1_norm_matches_field_l1(two_mode_run):
    # ||X'||^2 over one label period equals ||f||_{L^1}
    X0 = lg.configuration_from_field(two_mode_run.initial, 2048)
    flow = lg.advect_flow(two_mode_run, X0.X)
    X = lg.reconstruct_X(flow, X0)
    norms = np.array([x.h1_norm() for x in X])
    np.testing.assert_allclose(norms**2, two_mode_run.column("norm_L1_f"), rtol=1e-5)
    assert lg.check_string_h1(X, flow).status == "pass"


def test_sine_string_relaxes_to_uniform():
    X0 = sine_string(1024)
    f0 = lg.f0_from_configuration(X0, 1024)
    # the sine string has an analytic field, so truncating at K = 32 is harmless here
    tr = simulate(RunConfig(K=32, t_end=8.0, record_dt=0.5, snapshot_dt=0.1, cfl=0.5),
                  initial=torus.analyze(f0, 32))
    flow = lg.advect_flow(tr, X0.X)
    osc = [lg.string_oscillation(x, 1.0) for x in lg.reconstruct_X(flow, X0)]
    assert osc[0] == pytest.approx(0.6, rel=1e-3)
    assert np.all(np.diff(osc) < 0) and osc[-1] < 1e-3 * osc[0]


def test_well_stretched_constant(two_mode_run, constant_run):
    assert lg.well_stretched_constant(constant_run, 0.5) == 1.0
    lam = [lg.well_stretched_constant(two_mode_run, t) for t in (0.5, 1.0, 2.0)]
    assert np.all(np.diff(lam) >= 0)
    with pytest.raises(ValueError):
        lg.well_stretched_constant(two_mode_run, 0.123)


def test_well_stretched_cosine_06():
    tr = simulate(RunConfig(initial={"preset": "cosine", "amp": 0.6}, t_end=0.5, record_dt=0.5))
    assert lg.well_stretched_constant(tr, 0.5) == tr.records[-1].fmin


def test_smooth_flow_is_lipschitz_in_time(two_mode_run):
    times = np.r_[0.0, np.geomspace(1e-3, 1e-2, 5)]
    flow = lg.advect_flow(two_mode_run, torus.grid_nodes(64), times=times, dt=1e-3)
    assert lg.flow_time_exponent(flow, 1e-2) == pytest.approx(1.0, abs=0.01)
