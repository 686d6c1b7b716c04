import math

import numpy as np
import pytest

from asymvortex.field_core import make_grid, mg_profile, norm_X
from asymvortex.operators import apply_L, apply_Lambda
from asymvortex.winfty import (
    compute_w_infty,
    compute_z_infty,
    direct_bvp,
    h_potential,
    invert_lambda_mode2,
    mg_source,
    odd_even_ratio,
    omega_taylor,
    solve_homogeneous,
)


@pytest.fixture(scope="module")
def winf(grid):
    return compute_w_infty(grid, 12)


@pytest.fixture(scope="module")
def pair():
    return solve_homogeneous(16.0)


def test_h_potential_values():
    assert h_potential(0.0) == 1.0
    assert h_potential(2.0) == pytest.approx(1.0 / (math.e - 1.0), rel=1e-14)
    assert h_potential(1e-9) == pytest.approx(1.0, abs=1e-15)


def test_potential_strictly_positive():
    z = np.linspace(1e-6, 64.0, 200001)
    assert np.min(1.0 / z - z / np.expm1(z)) > 0


def test_h_potential_rejects_negative_argument():
    with pytest.raises(ValueError):
        h_potential(np.nan)


def test_homogeneous_asymptotics(pair):
    r = np.array([1e-3, 2e-3, 4e-3])
    pp, pm, _, _ = pair.evaluate(r)
    assert np.max(np.abs(pm / r**2 - 1.0)) < 1e-4
    pp, pm, _, _ = pair.evaluate(np.array([16.0]))
    assert pp[0] * 256.0 == pytest.approx(1.0, abs=1e-4)


def test_dual_asymptotics(pair):
    r = np.array([1e-3])
    pp, _, _, _ = pair.evaluate(r)
    assert 4 * r[0] ** 2 * pp[0] / pair.w0 == pytest.approx(1.0, rel=1e-2)
    _, pm, _, _ = pair.evaluate(np.array([16.0]))
    assert 4 * pm[0] / (pair.w0 * 256.0) == pytest.approx(1.0, rel=1e-2)


def test_wronskian_constant(pair):
    r = np.linspace(0.1, 10.0, 400)
    w = pair.wronskian(r)
    assert pair.w0 > 0
    assert np.ptp(w) / pair.w0 < 1e-6
    assert pair.wronskian(1.0)[0] == pytest.approx(pair.wronskian(5.0)[0], rel=1e-6)


def test_profile_signs(winf):
    profile, _ = winf
    inner = slice(0, -1)
    assert np.all(profile.dpsi_minus[inner] > 0)
    assert np.all(profile.dpsi_plus[inner] < 0)
    assert np.all(profile.omega[inner] < 0)
    assert abs(profile.omega_at(np.array([1e-7]))[0]) < 1e-12


def test_Omega_boundary_behaviour(winf, grid):
    profile, _ = winf
    assert abs(profile.green.Omega(np.array([1e-6]))[0]) < 1e-11
    assert profile.Omega[-1] * grid.r_max**2 == pytest.approx(profile.Omega_minus, rel=1e-8)


def test_Omega_constants(winf):
    profile, _ = winf
    assert profile.Omega_plus == pytest.approx(-0.38, abs=0.02)
    assert profile.Omega_minus == pytest.approx(-17.5, abs=0.3)


def test_asymptotic_fits_agree_with_integrals(winf):
    profile, _ = winf
    fits = profile.fits
    assert fits["Omega_plus_fit"] == pytest.approx(profile.Omega_plus, rel=1e-6)
    assert fits["Omega_minus_fit"] == pytest.approx(profile.Omega_minus, rel=1e-6)
    assert fits["slope_small_r"] == pytest.approx(2.0, abs=0.01)
    assert fits["slope_large_r"] == pytest.approx(-2.0, abs=0.05)
    assert fits["inner_fit_residual"] < 1e-4 and fits["outer_fit_residual"] < 1e-4


def test_defining_residual(winf):
    profile, w = winf
    assert profile.residual < 1e-6
    mg = mg_profile(w.grid, w.n_modes)
    assert norm_X(apply_Lambda(w) - mg) / norm_X(mg) < 1e-6


def test_phase_bookkeeping(winf):
    _, w = winf
    # w_inf = omega sin 2theta: purely imaginary mode-2 coefficient, nothing else
    assert np.max(np.abs(w.coeffs[2].real)) == 0.0
    others = np.delete(w.coeffs, 2, axis=0)
    assert np.max(np.abs(others)) == 0.0


def test_omega_is_even(winf):
    profile, _ = winf
    assert odd_even_ratio(profile) < 1e-6
    c = omega_taylor(profile)
    # omega ~ Omega_+ h(0) r^2 - r^2/4 near the origin
    assert c[2] == pytest.approx(profile.Omega_plus - 0.25, rel=1e-6)


def test_green_matches_direct_bvp(winf, grid):
    profile, _ = winf
    assert np.max(np.abs(direct_bvp(grid, mg_source(grid.r)) - profile.Omega)) < 1e-7


def test_invert_zero_rhs(grid, pair):
    w, parts = invert_lambda_mode2(grid, np.zeros(grid.n_r), pair)
    assert norm_X(w) == 0.0 and parts == {}


def test_invert_generic_rhs(grid, pair):
    # mixed-phase right-hand side: cos 2theta and sin 2theta parts
    rho = (1.0 + 2.0j) * grid.r**2 * np.exp(-grid.r**2 / 3.0)
    w, _ = invert_lambda_mode2(grid, rho, pair)
    target = np.zeros((3, grid.n_r), complex)
    target[2] = rho / grid.sqrt_g
    from asymvortex.field_core import ModeField

    rhs = ModeField(grid, target)
    assert norm_X(apply_Lambda(w) - rhs) / norm_X(rhs) < 1e-8


def test_z_infty(winf):
    _, w = winf
    z = compute_z_infty(w)
    lw = apply_L(w)
    assert norm_X(apply_Lambda(z) - lw) / norm_X(lw) < 1e-6
    assert np.max(np.abs(np.delete(z.coeffs, 2, axis=0))) == 0.0
    # cos 2theta phase
    assert np.max(np.abs(z.coeffs[2].imag)) < 1e-12 * np.max(np.abs(z.coeffs[2].real))


def test_refinement_and_truncation_stability(winf):
    profile, _ = winf
    fine, _ = compute_w_infty(make_grid(n_r=256))
    wide, _ = compute_w_infty(make_grid(r_max=24.0))
    assert fine.residual < 1e-7
    assert abs(wide.Omega_minus - profile.Omega_minus) < 0.3
    assert abs(fine.Omega_plus - profile.Omega_plus) < 1e-9


def test_export_schema(winf):
    profile, _ = winf
    header, rows = profile.csv_rows()
    assert header == ["r", "psi_plus", "psi_minus", "Omega", "omega"]
    assert rows.shape[1] == 5
    assert set(profile.summary()) == {"w0", "Omega_plus", "Omega_minus", "residual"}
