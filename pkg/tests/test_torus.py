import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from tpeskin import torus
from tpeskin.errors import AliasingError, MeanZeroError
from tpeskin.torus import GridField, SpectralField

from conftest import band_limited, random_field

# (1/2pi) int exp(cos x) cos(kx) dx by adaptive quadrature (= I_k(1)), frozen
EXP_COS_COEFFS = {0: 1.2660658777520084, 1: 0.565159103992485,
                  2: 0.13574766976703828, 5: 0.00027146315595691324}


def cos_field(k, amp=1.0, mean=0.0, capacity=None):
    c = np.zeros(k + 1, dtype=complex)
    c[0] = mean
    c[k] = amp / 2
    return SpectralField.from_coeffs(c, capacity)


def exp_cos_field(K):
    return torus.analyze(GridField.from_function(lambda x: np.exp(np.cos(x)), 4 * K + 4), K)


# ---------------------------------------------------------------- analyze

def test_analyze_constant():
    f = torus.analyze(GridField(np.ones(9)), 4)
    assert f.coeffs[0] == pytest.approx(1.0)
    np.testing.assert_allclose(np.abs(f.coeffs[1:]), 0.0, atol=1e-15)


def test_analyze_single_mode():
    f = torus.analyze(GridField.from_function(lambda x: np.cos(3 * x), 16), 4)
    expected = np.zeros(5)
    expected[3] = 0.5
    np.testing.assert_allclose(f.coeffs, expected, atol=1e-15)


def test_analyze_exp_cos_matches_quadrature():
    f = torus.analyze(GridField.from_function(lambda x: np.exp(np.cos(x)), 64), 20)
    for k, v in EXP_COS_COEFFS.items():
        assert f.coeffs[k] == pytest.approx(v, abs=1e-14)
    assert f.coeffs[1].real == pytest.approx(0.5651591, abs=1e-7)


def test_analyze_rejects_coarse_grid():
    with pytest.raises(AliasingError):
        torus.analyze(GridField(np.ones(8)), 4)


def test_exp_cos_coefficients_against_adaptive_quadrature():
    for k, v in EXP_COS_COEFFS.items():
        q = quad(lambda x: np.exp(np.cos(x)) * np.cos(k * x), -np.pi, np.pi,
                 epsabs=1e-15, limit=200)[0] / (2 * np.pi)
        assert q == pytest.approx(v, abs=1e-15)


# ---------------------------------------------------------------- synthesize

def test_synthesize_constant_and_cos():
    assert np.all(torus.synthesize(SpectralField.constant(1.0, 3), np.linspace(-3, 3, 7)) == 1.0)
    f = cos_field(1)
    np.testing.assert_allclose(torus.synthesize(f, [0.0, np.pi / 2]), [1.0, 0.0], atol=1e-15)


def test_synthesize_wraps_points():
    f = random_field(np.random.default_rng(3), 5)
    x = np.linspace(-3, 3, 11)
    np.testing.assert_allclose(torus.synthesize(f, x + 4 * np.pi), torus.synthesize(f, x), atol=1e-13)


@given(band_limited(max_K=20), st.integers(min_value=0, max_value=40))
def test_round_trip(f, extra):
    M = 2 * f.band_limit + 1 + extra
    g = torus.to_grid(f, M)
    np.testing.assert_allclose(g.samples, torus.synthesize(f, g.x), atol=1e-12)
    back = torus.analyze(g, f.band_limit)
    np.testing.assert_allclose(back.coeffs, f.coeffs, atol=1e-12)


def test_round_trip_grid_identity():
    x = torus.grid_nodes(64)
    g = GridField(0.3 + np.cos(2 * x) - 0.2 * np.sin(7 * x))
    f = torus.analyze(g, 10)
    np.testing.assert_allclose(torus.synthesize(f, x), g.samples, atol=1e-12)


# ---------------------------------------------------------------- multipliers

def test_hilbert_examples():
    h = torus.hilbert(cos_field(1))
    assert h.coeffs[1] == pytest.approx(-0.5j)
    assert np.all(torus.hilbert(SpectralField.constant(2.0, 4)).coeffs == 0)
    c = np.zeros(6, dtype=complex)
    c[2] = 0.15
    c[5] = -0.05j  # 0.1 sin 5x
    u = SpectralField(c)
    np.testing.assert_allclose(torus.hilbert(torus.hilbert(u)).coeffs, -u.coeffs, atol=1e-15)


def test_hilbert_of_cos_is_sin_on_grid():
    x = torus.grid_nodes(32)
    np.testing.assert_allclose(torus.to_grid(torus.hilbert(cos_field(1)), 32).samples,
                               np.sin(x), atol=1e-15)


@given(band_limited(zero_mean=True))
def test_hilbert_squared_is_minus_identity(u):
    np.testing.assert_allclose(torus.hilbert(torus.hilbert(u)).coeffs, -u.coeffs, atol=1e-14)


def test_half_laplacian_examples():
    f = torus.half_laplacian(cos_field(3))
    assert f.coeffs[3] == pytest.approx(1.5)
    assert np.all(torus.half_laplacian(SpectralField.constant(1.0, 2)).coeffs == 0)


@given(band_limited())
def test_half_laplacian_is_hilbert_of_derivative(f):
    lhs = torus.half_laplacian(f).coeffs
    rhs = torus.hilbert(torus.derivative(f)).coeffs
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


@given(band_limited())
def test_operators_preserve_band_limit(f):
    f = f.with_capacity(f.band_limit + 5)
    for op in (torus.hilbert, torus.derivative, torus.half_laplacian):
        g = op(f)
        assert g.band_limit == f.band_limit
        assert np.all(g.coeffs[f.band_limit + 1:] == 0)


def test_derivative_examples():
    sin1 = SpectralField(np.array([0, -0.5j]))
    assert torus.derivative(sin1).coeffs[1] == pytest.approx(0.5)
    assert np.all(torus.derivative(SpectralField.constant(3.0, 2)).coeffs == 0)


def test_derivative_matches_finite_differences():
    f = exp_cos_field(32)
    df = torus.derivative(f)
    x = np.linspace(-np.pi, np.pi, 101)
    h = 1e-4
    fd = (torus.synthesize(f, x + h) - torus.synthesize(f, x - h)) / (2 * h)
    np.testing.assert_allclose(torus.synthesize(df, x), fd, atol=1e-8)
    np.testing.assert_allclose(torus.synthesize(df, x), -np.sin(x) * np.exp(np.cos(x)), atol=1e-12)


# ---------------------------------------------------------------- fejer

def test_fejer_order_one_keeps_mean():
    f = random_field(np.random.default_rng(1), 6)
    g = torus.fejer(f, 1)
    assert g.band_limit == 0
    assert g.coeffs[0] == f.coeffs[0]
    assert np.all(g.coeffs[1:] == 0)


def test_fejer_multiplier():
    c = np.zeros(5, dtype=complex)
    c[2] = 1.0
    g = torus.fejer(SpectralField(c), 4)
    assert g.coeffs[2] == pytest.approx(0.5)
    assert g.band_limit == 2


def test_fejer_band_limit_becomes_min():
    f = random_field(np.random.default_rng(2), 10)
    assert torus.fejer(f, 4).band_limit == 3
    assert torus.fejer(f, 50).band_limit == 10


def test_fejer_preserves_positivity_of_clipped_field():
    M = 512
    g = GridField.from_function(lambda x: 0.1 + np.cos(x) ** 4, M)
    clipped = np.clip(g.samples, 1 / 4, 4)
    f = torus.fejer(torus.analyze(clipped, 64), 8)
    fine = torus.to_grid(f, 4096).samples
    assert fine.min() > 0
    # positivity bounds are inherited from the clip interval
    assert fine.min() >= 0.25 - 1e-12


@given(st.integers(min_value=1, max_value=40), st.integers(min_value=0, max_value=1000))
def test_fejer_positivity_property(N, seed):
    rng = np.random.default_rng(seed)
    raw = np.exp(rng.standard_normal(256))  # rough, positive samples
    smooth = torus.fejer(torus.analyze(raw, 100), N)
    assert torus.to_grid(smooth, 2048).samples.min() > 0


# ---------------------------------------------------------------- PV oracles

def test_hilbert_pv_cos():
    M = 4096
    g = GridField.from_function(np.cos, M)
    np.testing.assert_allclose(torus.hilbert_oracle_pv(g).samples, np.sin(g.x), atol=1e-6)


def test_pv_constant_is_zero():
    g = GridField(np.ones(64))
    assert np.max(np.abs(torus.hilbert_oracle_pv(g).samples)) < 1e-13
    assert np.all(torus.half_laplacian_oracle_pv(g).samples == 0)
    assert np.max(np.abs(torus.hilbert_oracle_pv(g, rule="punctured").samples)) < 1e-13


def test_half_laplacian_pv_cos2():
    M = 4096
    g = GridField.from_function(lambda x: np.cos(2 * x), M)
    np.testing.assert_allclose(torus.half_laplacian_oracle_pv(g).samples, 2 * np.cos(2 * g.x),
                               atol=1e-5)


@pytest.mark.slow
def test_pv_oracles_agree_with_spectral_exp_cos():
    f = exp_cos_field(32)
    M = 8192
    g = torus.to_grid(f, M)
    H = torus.to_grid(torus.hilbert(f), M).samples
    L = torus.to_grid(torus.half_laplacian(f), M).samples
    assert np.max(np.abs(torus.hilbert_oracle_pv(g).samples - H)) <= 1e-6
    assert np.max(np.abs(torus.half_laplacian_oracle_pv(g).samples - L)) <= 1e-6


def test_pv_oracle_converges_on_smooth_nonbandlimited_input():
    # exp(e^{iz}) is analytic in the disc and equals 1 at z=0, so
    # H[exp(cos x) cos(sin x)] = exp(cos x) sin(sin x)
    errs = []
    for M in (8, 16, 32, 64):
        g = GridField.from_function(lambda x: np.exp(np.cos(x)) * np.cos(np.sin(x)), M)
        exact = np.exp(np.cos(g.x)) * np.sin(np.sin(g.x))
        errs.append(np.max(np.abs(torus.hilbert_oracle_pv(g).samples - exact)))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-13


def test_punctured_rule_is_first_order():
    errs = []
    for M in (256, 512, 1024):
        g = GridField.from_function(np.cos, M)
        errs.append(np.max(np.abs(torus.hilbert_oracle_pv(g, rule="punctured").samples - np.sin(g.x))))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    np.testing.assert_allclose(ratios, 2.0, rtol=1e-3)


def test_pv_block_size_does_not_change_result():
    g = GridField.from_function(lambda x: np.exp(np.sin(2 * x)), 256)
    a = torus.hilbert_oracle_pv(g, block=7).samples
    b = torus.hilbert_oracle_pv(g, block=256).samples
    np.testing.assert_array_equal(a, b)


def test_pv_unknown_rule():
    with pytest.raises(ValueError):
        torus.hilbert_oracle_pv(GridField(np.ones(8)), rule="gauss")


# ---------------------------------------------------------------- norms

def test_norm_lp_examples():
    M = 64
    assert torus.norm_lp(GridField(np.ones(M)), 1) == pytest.approx(2 * np.pi)
    assert torus.norm_lp(GridField.from_function(np.cos, M), 2) == pytest.approx(np.sqrt(np.pi))
    assert torus.norm_lp(GridField.from_function(lambda x: 1 + 0.6 * np.cos(x), M), 1) == \
        pytest.approx(2 * np.pi)
    assert torus.norm_lp(GridField.from_function(np.cos, M), np.inf) == pytest.approx(1.0)


def test_norm_sobolev_examples():
    assert torus.norm_sobolev(cos_field(1), 0.5) == pytest.approx(np.sqrt(np.pi))
    assert torus.norm_sobolev(SpectralField.constant(3.0, 4), 0.7) == 0.0
    assert torus.norm_sobolev(cos_field(2), 1.0) == pytest.approx(np.sqrt(4 * np.pi))
    # cross-checks by direct quadrature
    assert quad(lambda x: np.cos(x) ** 2, -np.pi, np.pi)[0] == pytest.approx(np.pi)
    assert quad(lambda x: (2 * np.sin(2 * x)) ** 2, -np.pi, np.pi)[0] == pytest.approx(4 * np.pi)


def test_negative_order_requires_mean_zero():
    with pytest.raises(MeanZeroError):
        torus.norm_sobolev(cos_field(1, mean=1.0), -0.5)
    assert torus.norm_sobolev(cos_field(1), -0.5) == pytest.approx(np.sqrt(np.pi))


@given(band_limited(zero_mean=True))
def test_hhalf_squared_is_dissipation_integral(f):
    M = 4 * f.band_limit + 1
    fg = torus.to_grid(f, M).samples
    Lg = torus.to_grid(torus.half_laplacian(f), M).samples
    quad_val = 2 * np.pi / M * np.sum(fg * Lg)
    assert torus.norm_sobolev(f, 0.5) ** 2 == pytest.approx(quad_val, rel=1e-10, abs=1e-14)


def test_norm_wiener_examples():
    assert torus.norm_wiener(cos_field(1), 0, 0.0) == pytest.approx(1.0)
    assert torus.norm_wiener(SpectralField.constant(1.0, 3), 1, 2.0) == 0.0
    c = np.array([0, 0.1, 0, 0.025])
    assert torus.norm_wiener(SpectralField(c), 1, np.log(2)) == pytest.approx(1.6)


# ---------------------------------------------------------------- Cotlar

def test_cotlar_cos_and_constant():
    assert torus.cotlar_residual(cos_field(1)) <= 1e-13
    assert torus.cotlar_residual(SpectralField.constant(2.5, 3)) == 0.0


@given(band_limited(max_K=16))
def test_cotlar_random(u):
    assert torus.cotlar_residual(u) <= 1e-12


def test_cotlar_rejects_small_grid():
    with pytest.raises(AliasingError):
        torus.cotlar_residual(cos_field(3), M=8)


# ---------------------------------------------------------------- products

@given(band_limited(max_K=8), band_limited(max_K=8))
def test_multiply_matches_pointwise(f, g):
    p = torus.multiply(f, g)
    x = np.linspace(-np.pi, np.pi, 37)
    np.testing.assert_allclose(torus.synthesize(p, x),
                               torus.synthesize(f, x) * torus.synthesize(g, x), atol=1e-12)


def test_spectral_field_invariants():
    with pytest.raises(ValueError):
        SpectralField(np.array([1 + 1j, 0.2]))
    with pytest.raises(ValueError):
        SpectralField(np.array([1, 0.2, 0.1]), band_limit=1)
    f = SpectralField.from_coeffs([1, 0.3], capacity=8)
    assert f.capacity == 8 and f.band_limit == 1
