"""Velocity from vorticity, one azimuthal mode at a time, and the advection term.

Streamfunction convention: ``-Lap psi = w`` with ``v_r = (1/r) d_theta psi``
and ``v_theta = -d_r psi``, which reproduces ``v^G`` from ``G``.  At
``r_max`` the decaying far-field solution ``psi_n ~ r^{-n}`` is imposed
through ``psi_n' + (n/r_max) psi_n = 0``; this is exact whenever the
vorticity vanishes beyond ``r_max``.
"""

import numpy as np
from scipy import linalg

from .errors import GridMismatchError, NumericError
from .field_core import (
    ModeField,
    VelocityField,
    dealiased_theta_points,
    gradient_parts,
    project_modes,
    synth_modes,
)


def radial_laplacian(grid, n):
    """``d^2/dr^2 + (1/r) d/dr - n^2/r^2`` on profiles of mode ``n``."""
    p = n % 2
    r = grid.r
    return grid.deriv2[p] + grid.deriv[p] / r[:, None] - np.diag(n * n / r**2)


def stream_matrix(grid, n):
    """``-Lap_n`` with the outer boundary row replaced by the decay condition."""
    a = -radial_laplacian(grid, n)
    if n == 0:
        # only psi_0' is ever used, so any gauge will do
        a[-1] = 0.0
        a[-1, -1] = 1.0
    else:
        a[-1] = grid.deriv[n % 2][-1]
        a[-1, -1] += n / grid.r_max
    return a


def _stream_lu(grid, n):
    key = ("stream", n)
    if key not in grid._cache:
        a = stream_matrix(grid, n)
        lu = linalg.lu_factor(a)
        if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) == 0.0:
            raise NumericError(f"singular streamfunction operator for mode {n}")
        grid._cache[key] = lu
    return grid._cache[key]


def streamfunction_mode(grid, n, w_n):
    """Solve ``-(1/r)(r psi')' + (n^2/r^2) psi = w_n`` for the physical profile ``w_n``."""
    if n < 0:
        raise ValueError("mode index must be nonnegative")
    rhs = np.array(w_n, dtype=complex)
    rhs[-1] = 0.0
    return linalg.lu_solve(_stream_lu(grid, n), rhs)


def streamfunction(w):
    """Streamfunction profiles (rows n = 0..N) of a ModeField."""
    phys = w.physical
    return np.array([streamfunction_mode(w.grid, n, phys[n]) for n in range(w.n_modes + 1)])


def velocity_from_vorticity(w):
    """Biot-Savart velocity of ``w`` (any mean; mode 0 carries the circulation)."""
    grid = w.grid
    psi = streamfunction(w)
    vr = np.zeros_like(psi)
    vt = np.zeros_like(psi)
    for n in range(w.n_modes + 1):
        vt[n] = -grid.d(psi[n], n)
        if n:
            vr[n] = 1j * n * psi[n] / grid.r
    vt[0] = vt[0].real
    return VelocityField(grid, vr, vt)


def curl(v):
    """Physical vorticity profiles ``(1/r) d(r v_theta)/dr - (i n / r) v_r``."""
    grid = v.grid
    out = np.empty_like(v.vt)
    for n in range(v.n_modes + 1):
        out[n] = grid.d(grid.r * v.vt[n], n) / grid.r - 1j * n * v.vr[n] / grid.r
    return out


def advect(v, w, n_out=None, theta_points=None):
    """``v . grad w`` as a ModeField, evaluated on a dealiased angular grid.

    The result is returned in the same rescaled form as ``w`` and truncated
    to ``n_out`` modes (default: the larger input mode count).
    """
    if v.grid.key != w.grid.key:
        raise GridMismatchError("velocity and vorticity live on different grids")
    n_out = max(v.n_modes, w.n_modes) if n_out is None else n_out
    if theta_points is None:
        theta_points = dealiased_theta_points(max(v.n_modes, w.n_modes, n_out))
    radial, azim = gradient_parts(w)
    prod = synth_modes(v.vr, theta_points) * synth_modes(radial, theta_points)
    prod += synth_modes(v.vt, theta_points) * synth_modes(azim, theta_points)
    return ModeField(w.grid, project_modes(prod, n_out))
