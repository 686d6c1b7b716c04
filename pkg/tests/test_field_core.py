import math

import numpy as np
import pytest
from conftest import cartesian_integral, gaussian, polar_points
from hypothesis import given, settings
from hypothesis import strategies as st

from asymvortex.errors import (
    AliasingError,
    ConfigError,
    DomainError,
    GridMismatchError,
    NumericError,
)
from asymvortex.field_core import (
    ModeField,
    SpectralConfig,
    cartesian_table,
    dealiased_theta_points,
    g_lambda_profile,
    gaussian_profile,
    inner_Y,
    make_grid,
    mg_profile,
    norm_X,
    norm_Y,
    partial,
    profile_table,
    project,
    random_field,
    synthesize,
)


def test_config_defaults():
    cfg = SpectralConfig()
    assert (cfg.r_max, cfg.n_r, cfg.n_modes) == (16.0, 128, 12)
    assert cfg.theta_points >= int(math.ceil(1.5 * 25))


@pytest.mark.parametrize(
    "kwargs, name",
    [({"r_max": -1.0}, "r_max"), ({"n_r": 8}, "n_r"), ({"n_modes": 1}, "n_modes"),
     ({"picard_tol": 0.0}, "picard_tol"), ({"dealias_factor": 0.5}, "dealias_factor")],
)
def test_config_rejects(kwargs, name):
    with pytest.raises(ConfigError) as info:
        SpectralConfig(**kwargs)
    assert info.value.field == name


def test_dealiased_theta_points_cover_products():
    for n in range(2, 20):
        assert dealiased_theta_points(n) >= 1.5 * (2 * n + 1)


def test_nodes_inside_domain(grid):
    assert grid.r[0] > 0 and grid.r[-1] == pytest.approx(grid.r_max)
    assert np.all(np.diff(grid.r) > 0)


@given(st.integers(min_value=0, max_value=10))
def test_quadrature_gaussian_moments(k):
    # int_0^inf r^{2k} e^{-r^2/4} r dr = 2 4^k k!
    grid = make_grid()
    got = grid.integrate(grid.r ** (2 * k) * np.exp(-grid.r**2 / 4.0))
    assert got == pytest.approx(2.0 * 4.0**k * math.factorial(k), rel=1e-12)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 6])
def test_derivative_of_parity_profiles(grid, n):
    r = grid.r
    f = r**n * np.exp(-r**2 / 8.0)
    exact = (n * r ** max(n - 1, 0) if n else 0.0) * np.exp(-r**2 / 8.0) - r ** (n + 1) / 4.0 * np.exp(-r**2 / 8.0)
    assert np.max(np.abs(grid.d(f, n) - exact)) < 1e-10


def test_cumulative_integral(grid):
    # int_0^r z e^{-z^2/4} dz = 2 (1 - e^{-r^2/4})
    got = grid.cumint @ np.exp(-grid.r**2 / 4.0)
    assert np.max(np.abs(got - 2.0 * (1.0 - np.exp(-grid.r**2 / 4.0)))) < 1e-12


def test_interpolant_recovers_profile(grid):
    r_new = np.linspace(0.0, grid.r_max, 37)
    vals = grid.interpolate(grid.r**2 * np.exp(-grid.r**2 / 4.0), 0, r_new)
    assert np.max(np.abs(vals - r_new**2 * np.exp(-r_new**2 / 4.0))) < 1e-12


def test_gaussian_mean_and_norm(grid):
    G = gaussian_profile(grid)
    assert G.mean() == pytest.approx(1.0, abs=1e-13)
    # ||G||^2 in the weighted space is int G = 1
    assert norm_X(G) == pytest.approx(1.0, abs=1e-13)


def test_partial_of_gaussian(grid):
    G = gaussian_profile(grid, 4)
    x1, x2 = polar_points(grid, 16)
    for axis, x in ((1, x1), (2, x2)):
        d = synthesize(partial(G, axis), 16)
        assert np.max(np.abs(d - (-x / 2.0) * gaussian(x1, x2))) < 1e-14
    # ||d_i G||_X^2 = int x_i^2 G / 4 = 1/2
    assert norm_X(partial(G, 1)) ** 2 == pytest.approx(0.5, rel=1e-12)


def test_norms_against_cartesian_quadrature(grid):
    # w = x1 x2 G + x1 G (modes 1 and 2)
    def w(x1, x2):
        return (x1 * x2 + x1) * gaussian(x1, x2)

    def grad_sq(x1, x2):
        g = gaussian(x1, x2)
        d1 = (x2 + 1.0) * g - (x1 * x2 + x1) * x1 / 2.0 * g
        d2 = x1 * g - (x1 * x2 + x1) * x2 / 2.0 * g
        return (d1**2 + d2**2) / g

    r = grid.r
    c = np.zeros((3, grid.n_r), complex)
    c[1] = r / 2.0 * grid.sqrt_g  # x1 = r cos
    c[2] = -0.25j * r**2 * grid.sqrt_g  # x1 x2 = r^2 sin 2theta / 2
    field = ModeField.from_physical(grid, c * grid.sqrt_g)
    nx = cartesian_integral(lambda a, b: w(a, b) ** 2 / gaussian(a, b))
    ny = nx + cartesian_integral(grad_sq)
    assert norm_X(field) ** 2 == pytest.approx(nx, rel=1e-9)
    assert norm_Y(field) ** 2 == pytest.approx(ny, rel=1e-9)
    assert inner_Y(field, field) == pytest.approx(ny, rel=1e-9)


def test_g_lambda_matches_closed_form(grid):
    lam = 0.1
    field = g_lambda_profile(lam, grid, 16)
    x1, x2 = polar_points(grid, 64)
    exact = math.sqrt(1 - lam**2) / (4 * math.pi) * np.exp(-((1 + lam) * x1**2 + (1 - lam) * x2**2) / 4)
    assert np.max(np.abs(synthesize(field, 64) - exact)) < 1e-12
    assert field.mean() == pytest.approx(1.0, abs=1e-12)


def test_g_lambda_domain(grid):
    with pytest.raises(DomainError):
        g_lambda_profile(1.0, grid)


def test_mg_profile_matches_formula(grid):
    x1, x2 = polar_points(grid, 16)
    exact = -(x1**2 - x2**2) / 4.0 * gaussian(x1, x2)
    assert np.max(np.abs(synthesize(mg_profile(grid), 16) - exact)) < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1), st.integers(min_value=2, max_value=10))
def test_synthesis_projection_roundtrip(seed, n):
    grid = make_grid(n_r=32)
    w = random_field(grid, n, np.random.default_rng(seed))
    back = project(grid, synthesize(w, 2 * n + 1), n)
    assert np.max(np.abs(back.coeffs - w.coeffs)) < 1e-10 * np.max(np.abs(w.coeffs))


def test_aliasing_guard(grid):
    w = gaussian_profile(grid, 6)
    with pytest.raises(AliasingError):
        synthesize(w, 12)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1), st.floats(min_value=0.1, max_value=10))
def test_random_field_normalized(seed, scale):
    grid = make_grid(n_r=48)
    w = random_field(grid, 6, np.random.default_rng(seed), scale=scale)
    assert norm_X(w) == pytest.approx(scale, rel=1e-12)
    assert abs(w.mean()) < 1e-12 * scale


def test_arithmetic_and_grid_checks(grid, rng):
    a = random_field(grid, 4, rng)
    b = random_field(grid, 4, rng)
    assert norm_X((a + b) - b - a) < 1e-14
    assert norm_X(a * 2.0) == pytest.approx(2 * norm_X(a))
    other = random_field(make_grid(n_r=64), 4, rng)
    with pytest.raises(GridMismatchError):
        _ = a + other
    with pytest.raises(NumericError):
        ModeField(grid, np.full((3, grid.n_r), np.nan))


def test_export_tables(grid):
    header, rows = profile_table(mg_profile(grid))
    assert header == ["r", "mode_re_0", "mode_im_0", "mode_re_1", "mode_im_1", "mode_re_2", "mode_im_2"]
    assert rows.shape == (grid.n_r, 7)
    header, rows = cartesian_table(mg_profile(grid), 16)
    assert header == ["x1", "x2", "value"] and rows.shape == (grid.n_r * 16, 3)
