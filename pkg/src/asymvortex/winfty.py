"""The large-circulation limit profile ``w_inf = omega(r) sin 2theta`` with ``Lambda w_inf = M G``.

Writing ``Omega`` for the mode-2 streamfunction amplitude, ``Lambda w_inf = M G``
reduces to the radial problem

    -(1/r)(r Omega')' + (4/r^2 - h) Omega = S,   Omega(0) = Omega(inf) = 0,

with ``h = g / (2 phi)`` and ``S = -r^2 h / 4``.  It is solved with the
decaying homogeneous solutions ``psi_+`` (``~ 1/r^2`` at infinity) and
``psi_-`` (``~ r^2`` at the origin), obtained by integrating

    F'' = (4 - r^2 h(r)) F,   r = e^{+-t},

from the far end where the potential is negligible.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.integrate import solve_ivp

from .biot_savart import stream_matrix
from .errors import NumericError
from .field_core import ModeField, make_grid
from .operators import apply_L, apply_Lambda

R_SMALL = 1e-7
R_FAR = 14.0
ODE_RTOL = 1e-12


def h_potential(r):
    """``h(r) = (r^2/4) / (e^{r^2/4} - 1)``, with ``h(0) = 1``."""
    z = np.asarray(r, dtype=float) ** 2 / 4.0
    if np.any(z < 0) or np.any(~np.isfinite(z)):
        raise ValueError("h_potential needs finite r >= 0")
    safe = np.where(z > 0, z, 1.0)
    out = np.where(z > 0, safe / np.expm1(safe), 1.0)
    return out if out.ndim else float(out)


def two_phi(r):
    """``2 phi(r) = (1 - e^{-r^2/4}) / (pi r^2)``, regular at the origin."""
    z = np.asarray(r, dtype=float) ** 2 / 4.0
    safe = np.where(z > 0, z, 1.0)
    return np.where(z > 0, -np.expm1(-safe) / safe, 1.0) / (4.0 * math.pi)


def _gaussian(r):
    return np.exp(-np.asarray(r, float) ** 2 / 4.0) / (4.0 * math.pi)


def mg_source(r):
    """Right-hand side ``S = -r^2 h / 4`` of the radial problem for ``M G``."""
    r = np.asarray(r, dtype=float)
    return -(r**2) * h_potential(r) / 4.0


# --- homogeneous solutions -----------------------------------------------------


def _branch(sign, source, r_lo, r_hi, rtol=ODE_RTOL):
    """Integrate ``[F, F', I]`` in ``t = sign * log r`` from the far end.

    ``sign = +1`` builds ``psi_+`` starting at ``r_hi``; ``sign = -1`` builds
    ``psi_-`` starting at ``r_lo``.  ``I`` accumulates ``int z psi S dz``
    from the starting end, so that ``I_+(r) = int_r^inf`` and ``I_-(r) = int_0^r``.
    """

    def rhs(t, y):
        r = math.exp(sign * t)
        pot = 4.0 - r * r * float(h_potential(r))
        s = 0.0 if source is None else float(source(r))
        return [y[1], pot * y[0], -r * r * y[0] * s]

    t_start = sign * math.log(r_hi if sign > 0 else r_lo)
    t_end = sign * math.log(r_lo if sign > 0 else r_hi)
    e = math.exp(-2.0 * t_start)
    sol = solve_ivp(
        rhs, (t_start, t_end), [e, -2.0 * e, 0.0], method="DOP853",
        rtol=rtol, atol=[1e-300, 1e-300, 1e-18], first_step=1e-3, dense_output=True,
    )
    if sol.status != 0:
        raise NumericError(
            f"psi{'+' if sign > 0 else '-'} integration failed: {sol.message} "
            f"(nfev={sol.nfev}, last t={sol.t[-1]:.6g})"
        )
    return sol


@dataclass(frozen=True)
class HomogeneousPair:
    """Dense representations of ``psi_+`` and ``psi_-`` together with ``w0``."""

    plus: object
    minus: object
    w0: float
    r_lo: float
    r_hi: float

    def evaluate(self, r):
        """``(psi_+, psi_-, psi_+', psi_-')`` at radii inside ``[r_lo, r_hi]``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        yp = self.plus.sol(np.log(r))
        ym = self.minus.sol(-np.log(r))
        return yp[0], ym[0], yp[1] / r, -ym[1] / r

    def wronskian(self, r):
        """``r W(r) = r (psi_+ psi_-' - psi_+' psi_-)``, constant equal to ``w0``."""
        pp, pm, dpp, dpm = self.evaluate(r)
        return np.atleast_1d(r) * (pp * dpm - dpp * pm)


def solve_homogeneous(r_max=16.0, rtol=ODE_RTOL):
    """Integrate both homogeneous solutions over ``[R_SMALL, max(r_max, R_FAR)]``."""
    r_hi = max(float(r_max), R_FAR)
    plus = _branch(+1, None, R_SMALL, r_hi, rtol)
    minus = _branch(-1, None, R_SMALL, r_hi, rtol)
    pair = HomogeneousPair(plus, minus, 0.0, R_SMALL, r_hi)
    w0 = float(pair.wronskian(1.0)[0])
    if not w0 > 0:
        raise NumericError(f"non-positive Wronskian w0 = {w0}")
    return HomogeneousPair(plus, minus, w0, R_SMALL, r_hi)


# --- Green-function solve ------------------------------------------------------


@dataclass(frozen=True)
class GreenSolution:
    """``Omega`` for a given source, evaluable anywhere in ``[R_SMALL, r_hi]``."""

    pair: HomogeneousPair
    source: object
    plus: object
    minus: object

    def Omega(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        yp = self.plus.sol(np.log(r))
        ym = self.minus.sol(-np.log(r))
        return (yp[0] * ym[2] + ym[0] * yp[2]) / self.pair.w0

    @property
    def Omega_plus(self):
        """``lim Omega / r^2`` at the origin, ``(1/w0) int z psi_+ S dz``."""
        return float(self.plus.y[2, -1]) / self.pair.w0

    @property
    def Omega_minus(self):
        """``lim r^2 Omega`` at infinity, ``(1/w0) int z psi_- S dz``."""
        return float(self.minus.y[2, -1]) / self.pair.w0


def green_solve(source, pair=None, r_max=16.0, rtol=ODE_RTOL):
    """Solve ``-(1/r)(r Omega')' + (4/r^2 - h) Omega = source`` with decay at both ends."""
    pair = pair or solve_homogeneous(r_max, rtol)
    plus = _branch(+1, source, pair.r_lo, pair.r_hi, rtol)
    minus = _branch(-1, source, pair.r_lo, pair.r_hi, rtol)
    return GreenSolution(pair, source, plus, minus)


def direct_bvp(grid, source_values):
    """Independent oracle: collocation solve of the radial problem on ``grid``.

    The outer row imposes the decay condition ``Omega' + 2 Omega / r = 0``.
    """
    a = stream_matrix(grid, 2).astype(float)
    a[:-1] -= np.diag(h_potential(grid.r))[:-1]
    b = np.array(source_values, dtype=float)
    b[-1] = 0.0
    return linalg.solve(a, b)


def invert_lambda_mode2(grid, rhs, pair=None):
    """Solve ``Lambda w = rhs`` for a field living on mode +-2 only.

    ``rhs`` is the physical mode-2 coefficient (complex profile on ``grid``).
    Returns ``(w, parts)`` where ``w`` is the ModeField and ``parts`` maps
    ``'re'``/``'im'`` to ``(GreenSolution, omega)`` for the two real phases
    (``cos 2theta`` for the real part, ``sin 2theta`` for the imaginary part).
    """
    rhs = np.asarray(rhs, dtype=complex)
    pair = pair or solve_homogeneous(grid.r_max)
    c2 = np.zeros(grid.n_r, complex)
    parts = {}
    for name, unit, comp in (("re", 1.0, rhs.real), ("im", 1j, rhs.imag)):
        if not np.any(comp):
            continue
        # with c = -i a the mode-2 equation reads 2 phi a - g Psi[a] = rho
        interp = grid.interpolant(comp, 0)
        sol = green_solve(lambda r, f=interp: float(f(r)) / float(two_phi(r)), pair)
        Om = sol.Omega(grid.r)
        a = (comp + grid.g * Om) / two_phi(grid.r)
        c2 += -1j * unit * a
        parts[name] = (sol, a)
    coeffs = np.zeros((3, grid.n_r), complex)
    coeffs[2] = c2 / grid.sqrt_g
    return ModeField(grid, coeffs), parts


# --- w_inf and z_inf ------------------------------------------------------------


@dataclass
class WInftyProfile:
    """Radial data of ``w_inf``; arrays are sampled at the grid nodes ``r``."""

    r: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    dpsi_plus: np.ndarray
    dpsi_minus: np.ndarray
    w0: float
    Omega: np.ndarray
    omega: np.ndarray
    Omega_plus: float
    Omega_minus: float
    fits: dict = field(default_factory=dict)
    residual: float = float("nan")
    green: object = field(default=None, repr=False)

    def omega_at(self, r):
        """``omega(r) = h (Omega - r^2/4)`` at arbitrary radii."""
        r = np.asarray(r, dtype=float)
        return h_potential(r) * (self.green.Omega(r) - r**2 / 4.0)

    def csv_rows(self):
        header = ["r", "psi_plus", "psi_minus", "Omega", "omega"]
        return header, np.column_stack([self.r, self.psi_plus, self.psi_minus, self.Omega, self.omega])

    def summary(self):
        return {
            "w0": self.w0,
            "Omega_plus": self.Omega_plus,
            "Omega_minus": self.Omega_minus,
            "residual": self.residual,
        }


def fit_asymptotics(green, r_max, inner=(1e-3, 0.2), outer=(0.6, 0.9), n=64):
    """Least-squares fits of ``Omega/r^2`` near 0 and ``r^2 Omega`` near ``r_max``.

    Also returns log-log slopes at both ends.
    """
    ri = np.geomspace(inner[0], inner[1], n)
    yi = green.Omega(ri) / ri**2
    vi = np.vander(ri**2, 3, increasing=True)
    ci, res_i, *_ = np.linalg.lstsq(vi, yi, rcond=None)
    ro = np.linspace(outer[0] * r_max, outer[1] * r_max, n)
    yo = green.Omega(ro) * ro**2
    c_out = float(np.mean(yo))
    slope_in = np.polyfit(np.log(ri[:8]), np.log(np.abs(green.Omega(ri[:8]))), 1)[0]
    slope_out = np.polyfit(np.log(ro), np.log(np.abs(green.Omega(ro))), 1)[0]
    return {
        "Omega_plus_fit": float(ci[0]),
        "Omega_minus_fit": c_out,
        "inner_fit_residual": float(np.max(np.abs(vi @ ci - yi))),
        "outer_fit_residual": float(np.max(np.abs(yo - c_out))),
        "slope_small_r": float(slope_in),
        "slope_large_r": float(slope_out),
    }


def omega_taylor(profile, r_hi=0.1, degree=8, n=200):
    """Polynomial coefficients (increasing powers of r) of ``omega`` fitted on ``(0, r_hi]``."""
    r = r_hi * (1.0 - np.cos(np.linspace(0.0, np.pi / 2, n)))[1:]
    c = np.polynomial.polynomial.polyfit(r / r_hi, profile.omega_at(r), degree)
    return c / r_hi ** np.arange(degree + 1)


def odd_even_ratio(profile):
    """``max(|c1|, |c3|) / |c2|`` from :func:`omega_taylor`; vanishes for an even profile.

    Only the low coefficients are compared since the top ones of a finite fit
    absorb the truncated tail.
    """
    c = omega_taylor(profile)
    return float(max(abs(c[1]), abs(c[3])) / abs(c[2]))


def compute_w_infty(grid=None, n_modes=2, pair=None):
    """``(WInftyProfile, w_inf)`` with ``w_inf = omega(r) sin 2theta``."""
    grid = grid or make_grid()
    pair = pair or solve_homogeneous(grid.r_max)
    green = green_solve(mg_source, pair)
    r = grid.r
    Om = green.Omega(r)
    omega = h_potential(r) * (Om - r**2 / 4.0)
    pp, pm, dpp, dpm = pair.evaluate(r)
    coeffs = np.zeros((max(n_modes, 2) + 1, grid.n_r), complex)
    coeffs[2] = -0.5j * omega / grid.sqrt_g
    w = ModeField(grid, coeffs)
    profile = WInftyProfile(
        r=r, psi_plus=pp, psi_minus=pm, dpsi_plus=dpp, dpsi_minus=dpm, w0=pair.w0,
        Omega=Om, omega=omega, Omega_plus=green.Omega_plus, Omega_minus=green.Omega_minus,
        fits=fit_asymptotics(green, grid.r_max), green=green,
    )
    profile.residual = lambda_residual(w)
    return profile, w


def lambda_residual(w_inf):
    """``||Lambda w_inf - M G||_X / ||M G||_X`` with the discrete operators."""
    from .field_core import mg_profile, norm_X

    mg = mg_profile(w_inf.grid, w_inf.n_modes)
    return norm_X(apply_Lambda(w_inf) - mg) / norm_X(mg)


def compute_z_infty(w_inf, pair=None):
    """Mode +-2 field ``z_inf`` with ``Lambda z_inf = L w_inf`` (``cos 2theta`` phase)."""
    grid = w_inf.grid
    rhs = apply_L(w_inf.with_modes(2)).coeffs[2] * grid.sqrt_g
    z, _ = invert_lambda_mode2(grid, rhs, pair)
    return z.with_modes(w_inf.n_modes)
