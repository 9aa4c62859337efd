import numpy as np
import pytest
from hypothesis import given, strategies as st

from hamcouple.errors import SchemaError
from hamcouple.grid import Grid3, PhaseGrid, spectral_diff
from hamcouple.state import band_limited, maxwellian


def test_quad_weight_and_volume():
    g = Grid3((4, 5, 2), (1.0, 2.0, 4.0))
    assert g.quad_weight == pytest.approx(0.25 * 0.4 * 2.0)
    assert g.volume == pytest.approx(8.0)
    assert g.integrate(np.ones(g.dims)) == pytest.approx(8.0)


def test_invalid_dims_rejected():
    with pytest.raises(SchemaError):
        Grid3((0, 4, 4))
    with pytest.raises(SchemaError):
        Grid3((4, 4, 4), (1.0, -1.0, 1.0))


def test_derivative_of_constant_is_zero():
    g = Grid3((8, 8, 8))
    for ax in range(3):
        assert np.abs(g.derivative(np.ones(g.dims), ax)).max() == 0.0


def test_derivative_of_sine():
    L = 3.0
    g = Grid3((16, 1, 1), (L, 1.0, 1.0))
    x = g.coords()[0]
    k = 2 * np.pi / L
    d = g.derivative(np.sin(k * x), 0)
    assert np.abs(d - k * np.cos(k * x)).max() < 1e-12


def test_derivative_of_sine_squared():
    # sin^2 has mode 2, resolved on 8 points
    L = 1.0
    g = Grid3((8, 1, 1))
    x = g.coords()[0]
    k = 2 * np.pi / L
    d = g.derivative(np.sin(k * x) ** 2, 0)
    assert np.abs(d - k * np.sin(2 * k * x)).max() < 1e-12


@pytest.mark.parametrize("mode", [1, 2, 3, 5, 7])
def test_single_resolved_mode_exact(mode):
    g = Grid3((1, 16, 1), (1.0, 2.5, 1.0))
    y = g.coords()[1]
    k = 2 * np.pi * mode / 2.5
    d = g.derivative(np.cos(k * y), 1)
    ref = -k * np.sin(k * y)
    assert np.abs(d - ref).max() / np.abs(ref).max() < 1e-12


def test_collapsed_axis_derivative_is_zero():
    g = Grid3((6, 1, 1))
    a = np.random.default_rng(0).normal(size=g.dims)
    assert np.abs(g.derivative(a, 1)).max() == 0.0


def test_curl_of_uniform_field():
    g = Grid3((6, 6, 6))
    v = np.stack([np.full(g.dims, c) for c in (1.0, -2.0, 0.5)])
    assert np.abs(g.curl(v)).max() == 0.0


def test_curl_analytic():
    L = 2.0
    g = Grid3((16, 1, 1), (L, 1.0, 1.0))
    x = g.coords()[0]
    k = 2 * np.pi / L
    v = np.stack([np.zeros(g.dims), np.zeros(g.dims), np.sin(k * x)])
    c = g.curl(v)
    assert np.abs(c[0]).max() < 1e-12
    assert np.abs(c[1] + k * np.cos(k * x)).max() < 1e-12
    assert np.abs(c[2]).max() < 1e-12


def test_integral_of_sine_vanishes():
    g = Grid3((16, 1, 1))
    x = g.coords()[0]
    assert abs(g.integrate(np.sin(2 * np.pi * x))) < 1e-14


def test_axis_mismatch():
    g = Grid3((4, 4, 4))
    with pytest.raises(SchemaError):
        g.derivative(np.zeros(g.dims), 3)
    with pytest.raises(SchemaError):
        g.derivative(np.zeros((5, 4, 4)), 0)


def test_spectral_diff_nyquist_zeroed():
    # the Nyquist mode has no well-defined odd derivative on an even grid
    n = 8
    a = np.cos(np.pi * np.arange(n))
    assert np.abs(spectral_diff(a, 0, n, 1.0)).max() < 1e-12


def test_phase_grid_weights():
    pg = PhaseGrid(Grid3((4, 4, 1), (2.0, 2.0, 1.0)), (8, 6, 1), (1.5, 2.0, 1.0))
    assert pg.momentum_weight == pytest.approx((3.0 / 8) * (4.0 / 6) * 2.0)
    assert pg.quad_weight == pytest.approx(pg.spatial.quad_weight * pg.momentum_weight)
    p = pg.momenta()
    assert p[0].min() == pytest.approx(-1.5)
    assert p[0].max() < 1.5


def test_phase_derivative_in_momentum():
    pg = PhaseGrid(Grid3((2, 1, 1)), (16, 1, 1), (2.0, 1.0, 1.0))
    p = pg.momenta()[0]
    k = 2 * np.pi / 4.0
    f = np.sin(k * p) * np.ones(pg.shape)
    d = pg.derivative(f, "p1")
    assert np.abs(d - k * np.cos(k * p)).max() < 1e-12
    with pytest.raises(SchemaError):
        pg.derivative(f, "q1")


def test_boundary_mass_of_resolved_maxwellian():
    pg = PhaseGrid(Grid3((2, 2, 1)), (24, 24, 1), (1.0, 1.0, 1.0))
    f = maxwellian(pg)
    assert pg.boundary_mass(f) < 1e-8
    # a hot distribution spills over the box edge
    hot = maxwellian(pg, temperature=1.0)
    assert pg.boundary_mass(hot) > 1e-3


seeds = st.integers(min_value=0, max_value=2**31 - 1)


@given(seeds)
def test_integration_by_parts(seed):
    rng = np.random.default_rng(seed)
    g = Grid3((6, 5, 4), (1.0, 1.7, 0.6))
    f, h = rng.normal(size=(2,) + g.dims)
    for ax in range(3):
        lhs = g.integrate(f * g.derivative(h, ax))
        rhs = -g.integrate(h * g.derivative(f, ax))
        assert abs(lhs - rhs) < 1e-12 * (1 + np.abs(f).max() * np.abs(h).max())


@given(seeds)
def test_integral_of_derivative_vanishes(seed):
    rng = np.random.default_rng(seed)
    g = Grid3((8, 7, 1))
    f = rng.normal(size=g.dims)
    for ax in range(2):
        assert abs(g.integrate(g.derivative(f, ax))) < 1e-13


@given(seeds)
def test_div_curl_and_curl_grad(seed):
    rng = np.random.default_rng(seed)
    g = Grid3((6, 6, 6))
    v = band_limited(g, rng, 3)
    s = band_limited(g, rng, 1)[0]
    assert np.abs(g.div(g.curl(v))).max() < 1e-12
    assert np.abs(g.curl(g.grad(s))).max() < 1e-12
    # also for unstructured data
    w = rng.normal(size=(3,) + g.dims)
    assert np.abs(g.div(g.curl(w))).max() < 1e-11
