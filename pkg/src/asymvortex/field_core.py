"""Radial grids and Fourier-in-angle fields.

A scalar field on the plane is stored as complex radial profiles
``c_n(r)`` for ``0 <= n <= N``; negative modes follow from reality,
``c_{-n} = conj(c_n)``.  Vorticity-type fields keep the rescaled profile
``f_n = G^{-1/2} w_n`` so that the Gaussian-weighted norm is a plain
``L^2`` norm and ``exp(r^2/4)`` never has to be formed.

Radial discretization: Chebyshev collocation on ``[-r_max, r_max]``
folded onto its positive half using the parity ``f_n(-r) = (-1)^n
f_n(r)``.  The node count is even, so ``r = 0`` is never a node and the
regularity of each mode at the origin is built into the representation.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy import fft as sfft
from scipy import special

from .errors import AliasingError, ConfigError, GridMismatchError, NumericError

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class SpectralConfig:
    """Discretization and solver tolerances (dimensionless, gamma = nu = 1)."""

    r_max: float = 16.0
    n_r: int = 128
    n_modes: int = 12
    dealias_factor: float = 1.5
    picard_tol: float = 1e-10
    picard_max_iter: int = 100

    def __post_init__(self):
        if not (self.r_max > 0 and math.isfinite(self.r_max)):
            raise ConfigError("r_max", f"must be positive, got {self.r_max}")
        if int(self.n_r) != self.n_r or self.n_r < 16:
            raise ConfigError("n_r", f"must be an integer >= 16, got {self.n_r}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 2:
            raise ConfigError("n_modes", f"must be an integer >= 2, got {self.n_modes}")
        if not self.dealias_factor >= 1:
            raise ConfigError("dealias_factor", f"must be >= 1, got {self.dealias_factor}")
        if not self.picard_tol > 0:
            raise ConfigError("picard_tol", f"must be positive, got {self.picard_tol}")
        if int(self.picard_max_iter) != self.picard_max_iter or self.picard_max_iter < 1:
            raise ConfigError("picard_max_iter", "must be a positive integer")

    @property
    def theta_points(self):
        return dealiased_theta_points(self.n_modes, self.dealias_factor)


def dealiased_theta_points(n_modes, dealias_factor=1.5):
    """Angular collocation count for products of two fields with ``|n| <= n_modes``."""
    return sfft.next_fast_len(int(math.ceil(dealias_factor * (2 * n_modes + 1))))


def _cheb_matrix(m):
    """First-derivative Chebyshev matrix on the m+1 Gauss-Lobatto points of [-1, 1]."""
    k = np.arange(m + 1)
    x = np.sin(np.pi * (m - 2 * k) / (2 * m))
    c = np.ones(m + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** k
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(m + 1))
    d -= np.diag(d.sum(axis=1))
    return x, d


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Collocation nodes in (0, r_max] with derivative, quadrature and integration matrices.

    ``weights`` integrate ``E(r) r dr`` over (0, r_max] for even ``E``.
    ``deriv[p]`` differentiates a profile of parity ``p`` (0 even, 1 odd),
    ``deriv2[p]`` is its second derivative.  ``cumint`` maps even ``F`` to
    ``int_0^r z F(z) dz`` at the nodes.
    """

    r_max: float
    n_r: int
    r: np.ndarray
    weights: np.ndarray
    deriv: tuple
    deriv2: tuple
    cumint: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def key(self):
        return (float(self.r_max), int(self.n_r))

    @property
    def t(self):
        """Nodes in the Chebyshev variable ``t = 2 (r/r_max)^2 - 1``."""
        return 2.0 * (self.r / self.r_max) ** 2 - 1.0

    def d(self, values, parity):
        return self.deriv[parity % 2] @ values if values.ndim == 1 else values @ self.deriv[parity % 2].T

    def integrate(self, values):
        """``int_0^r_max E(r) r dr`` for even integrands sampled at the nodes."""
        return values @ self.weights

    def interpolant(self, values, parity):
        """Callable polynomial interpolant of a parity-``parity`` profile, zero beyond r_max."""
        data = values / self.r if parity % 2 else values
        coef = np.linalg.solve(cheb.chebvander(self.t, self.n_r - 1), data)
        r_max = self.r_max

        def evaluate(r_new):
            r_new = np.asarray(r_new, dtype=float)
            out = cheb.chebval(2.0 * (r_new / r_max) ** 2 - 1.0, coef)
            out = out * r_new if parity % 2 else out
            return np.where(r_new <= r_max, out, 0.0)

        return evaluate

    def interpolate(self, values, parity, r_new):
        """Evaluate the interpolant of a parity-``parity`` profile at arbitrary radii."""
        return self.interpolant(values, parity)(r_new)

    # Gaussian reference profiles at the nodes
    @property
    def g(self):
        return np.exp(-self.r**2 / 4.0) / FOUR_PI

    @property
    def sqrt_g(self):
        return np.exp(-self.r**2 / 8.0) / math.sqrt(FOUR_PI)

    @property
    def phi(self):
        """Angular velocity of the Gaussian vortex, ``(1 - e^{-r^2/4}) / (2 pi r^2)``."""
        return -np.expm1(-self.r**2 / 4.0) / (2.0 * math.pi * self.r**2)


@lru_cache(maxsize=16)
def _build_grid(r_max, n_r):
    m = 2 * n_r - 1
    x, dfull = _cheb_matrix(m)
    pos = np.arange(n_r)[::-1]  # positive nodes in increasing order
    mirror = m - pos
    r = r_max * x[pos]
    deriv = []
    for p in (0, 1):
        sign = -1.0 if p else 1.0
        deriv.append((dfull[np.ix_(pos, pos)] + sign * dfull[np.ix_(pos, mirror)]) / r_max)
    deriv2 = (deriv[1] @ deriv[0], deriv[0] @ deriv[1])

    t = 2.0 * (r / r_max) ** 2 - 1.0
    vander = cheb.chebvander(t, n_r - 1)
    moments = np.zeros(n_r)
    k = np.arange(0, n_r, 2, dtype=float)
    moments[::2] = 2.0 / (1.0 - k**2)
    weights = np.linalg.solve(vander.T, moments) * r_max**2 / 4.0
    cint = cheb.chebint(np.eye(n_r), lbnd=-1, axis=0)
    cumint = cheb.chebvander(t, n_r) @ cint @ np.linalg.inv(vander) * r_max**2 / 4.0

    for arr in (r, weights, cumint, *deriv, *deriv2):
        arr.setflags(write=False)
    return RadialGrid(float(r_max), int(n_r), r, weights, tuple(deriv), tuple(deriv2), cumint)


def make_grid(config=None, *, r_max=None, n_r=None):
    """Radial grid for ``config``; keyword overrides win.  Same inputs give the same object."""
    config = config or SpectralConfig()
    r_max = config.r_max if r_max is None else r_max
    n_r = config.n_r if n_r is None else n_r
    SpectralConfig(r_max=r_max, n_r=n_r)  # validation
    return _build_grid(float(r_max), int(n_r))


def _check_same_grid(*grids):
    keys = {g.key for g in grids}
    if len(keys) != 1:
        raise GridMismatchError(f"fields live on different grids: {sorted(keys)}")


@dataclass(frozen=True, eq=False)
class ModeField:
    """Real scalar field as rescaled Fourier profiles ``f_n = G^{-1/2} c_n``, n = 0..N."""

    grid: RadialGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[1] != self.grid.n_r:
            raise GridMismatchError(f"coefficient shape {c.shape} does not match n_r={self.grid.n_r}")
        if not np.all(np.isfinite(c)):
            raise NumericError("non-finite mode coefficients")
        c[0] = c[0].real
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid, n_modes):
        return cls(grid, np.zeros((n_modes + 1, grid.n_r), complex))

    @classmethod
    def from_physical(cls, grid, modes):
        """Build from physical profiles ``c_n(r)`` (rows n = 0..N)."""
        modes = np.asarray(modes, dtype=complex)
        return cls(grid, modes * (math.sqrt(FOUR_PI) * np.exp(grid.r**2 / 8.0)))

    @property
    def n_modes(self):
        return self.coeffs.shape[0] - 1

    @property
    def physical(self):
        """Physical profiles ``c_n(r) = G^{1/2} f_n``."""
        return self.coeffs * self.grid.sqrt_g

    def mean(self):
        """``int w dx``."""
        return 2.0 * math.pi * self.grid.integrate(self.physical[0].real)

    def with_modes(self, n_modes):
        c = np.zeros((n_modes + 1, self.grid.n_r), complex)
        k = min(n_modes, self.n_modes) + 1
        c[:k] = self.coeffs[:k]
        return ModeField(self.grid, c)

    def keep_modes(self, modes):
        mask = np.zeros(self.n_modes + 1, bool)
        mask[[m for m in modes if 0 <= m <= self.n_modes]] = True
        return ModeField(self.grid, np.where(mask[:, None], self.coeffs, 0.0))

    def zero_mean(self):
        """X-orthogonal projection removing the component along G."""
        k = self.grid.sqrt_g
        c = self.coeffs.copy()
        c[0] -= k * self.grid.integrate(k * c[0].real) / self.grid.integrate(k * k)
        return ModeField(self.grid, c)

    def mode_norms(self):
        """X-norm carried by each retained mode pair ``+-n``."""
        dens = self.grid.integrate(np.abs(self.coeffs) ** 2)
        dens[1:] *= 2.0
        return np.sqrt(2.0 * math.pi * dens)

    def _coerce(self, other):
        if not isinstance(other, ModeField):
            return NotImplemented
        _check_same_grid(self.grid, other.grid)
        n = max(self.n_modes, other.n_modes)
        return self.with_modes(n).coeffs, other.with_modes(n).coeffs

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is NotImplemented:
            return pair
        return ModeField(self.grid, pair[0] + pair[1])

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is NotImplemented:
            return pair
        return ModeField(self.grid, pair[0] - pair[1])

    def __mul__(self, scalar):
        if isinstance(scalar, ModeField):
            return NotImplemented
        return ModeField(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __neg__(self):
        return ModeField(self.grid, -self.coeffs)


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Mode-resolved physical velocity: radial ``vr[n]`` and azimuthal ``vt[n]``."""

    grid: RadialGrid
    vr: np.ndarray
    vt: np.ndarray

    def __post_init__(self):
        for name in ("vr", "vt"):
            a = np.array(getattr(self, name), dtype=complex)
            a[0] = a[0].real
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.vr.shape != self.vt.shape:
            raise GridMismatchError("radial and azimuthal components differ in shape")

    @property
    def n_modes(self):
        return self.vr.shape[0] - 1

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        n = max(self.n_modes, other.n_modes)
        a, b = _pad(self.vr, n), _pad(other.vr, n)
        c, d = _pad(self.vt, n), _pad(other.vt, n)
        return VelocityField(self.grid, a + b, c + d)

    def __mul__(self, scalar):
        return VelocityField(self.grid, self.vr * float(scalar), self.vt * float(scalar))

    __rmul__ = __mul__

    def divergence(self):
        """Per-mode ``(1/r) d(r v_r)/dr + (i n / r) v_theta`` at the nodes."""
        grid = self.grid
        n = np.arange(self.n_modes + 1)
        out = np.empty_like(self.vr)
        for k in n:
            # r v_r has the parity of the mode index
            rv = grid.r * self.vr[k]
            out[k] = grid.d(rv, k) / grid.r + 1j * k * self.vt[k] / grid.r
        return out


def _pad(a, n):
    out = np.zeros((n + 1, a.shape[1]), complex)
    k = min(n, a.shape[0] - 1) + 1
    out[:k] = a[:k]
    return out


# --- reference profiles -------------------------------------------------------


def gaussian_profile(grid, n_modes=2):
    """The Gaussian vortex ``G = e^{-r^2/4} / (4 pi)`` as a mode-0 field."""
    c = np.zeros((n_modes + 1, grid.n_r), complex)
    c[0] = grid.sqrt_g
    return ModeField(grid, c)


def vG_profile(grid, n_modes=2):
    """Velocity of the Gaussian vortex: purely azimuthal, ``(1 - e^{-r^2/4}) / (2 pi r)``."""
    vt = np.zeros((n_modes + 1, grid.n_r), complex)
    vt[0] = grid.r * grid.phi
    return VelocityField(grid, np.zeros_like(vt), vt)


def g_lambda_profile(lam, grid, n_modes=12):
    """Anisotropic Gaussian annihilated by ``L + lam M``; only even modes are populated."""
    from .errors import DomainError

    if not 0.0 <= lam < 1.0:
        raise DomainError(f"asymmetry must lie in [0, 1), got {lam}")
    # f = G^{-1/2} G_lam = sqrt(1-lam^2)/sqrt(4 pi) e^{-r^2/8} exp(-z cos 2theta), z = lam r^2/4
    r2 = grid.r**2
    z = lam * r2 / 4.0
    pref = math.sqrt(1.0 - lam * lam) / math.sqrt(FOUR_PI) * np.exp(-r2 / 8.0 + z)
    c = np.zeros((n_modes + 1, grid.n_r), complex)
    for k in range(n_modes // 2 + 1):
        c[2 * k] = (-1) ** k * special.ive(k, z) * pref
    return ModeField(grid, c)


def mg_profile(grid, n_modes=2):
    """``M G = -(1/4) r^2 g(r) cos 2theta`` as a mode +-2 field."""
    c = np.zeros((max(n_modes, 2) + 1, grid.n_r), complex)
    c[2] = -(grid.r**2) * grid.sqrt_g / 8.0
    return ModeField(grid, c)


# --- norms --------------------------------------------------------------------


def inner_X(w1, w2):
    """``(w1, w2)_X = int G^{-1} w1 w2 dx``."""
    _check_same_grid(w1.grid, w2.grid)
    n = min(w1.n_modes, w2.n_modes) + 1
    dens = w1.grid.integrate((np.conj(w1.coeffs[:n]) * w2.coeffs[:n]).real)
    dens[1:] *= 2.0
    return 2.0 * math.pi * float(dens.sum())


def norm_X(w):
    val = inner_X(w, w)
    if not math.isfinite(val):
        raise NumericError("non-finite X-norm")
    return math.sqrt(max(val, 0.0))


def gradient_parts(w):
    """Rescaled gradient ``G^{-1/2} grad w`` split per mode into (radial, azimuthal) profiles."""
    grid = w.grid
    radial = np.empty_like(w.coeffs)
    azim = np.empty_like(w.coeffs)
    for n in range(w.n_modes + 1):
        f = w.coeffs[n]
        radial[n] = grid.d(f, n) - grid.r * f / 4.0
        azim[n] = 1j * n * f / grid.r
    return radial, azim


def norm_Y(w):
    """``sqrt(||w||_X^2 + ||d1 w||_X^2 + ||d2 w||_X^2)``."""
    radial, azim = gradient_parts(w)
    dens = w.grid.integrate(np.abs(w.coeffs) ** 2 + np.abs(radial) ** 2 + np.abs(azim) ** 2)
    dens[1:] *= 2.0
    val = 2.0 * math.pi * float(dens.sum())
    if not math.isfinite(val):
        raise NumericError("non-finite Y-norm")
    return math.sqrt(val)


def inner_Y(w1, w2):
    _check_same_grid(w1.grid, w2.grid)
    r1, a1 = gradient_parts(w1)
    r2, a2 = gradient_parts(w2)
    n = min(w1.n_modes, w2.n_modes) + 1
    prod = np.conj(w1.coeffs[:n]) * w2.coeffs[:n] + np.conj(r1[:n]) * r2[:n] + np.conj(a1[:n]) * a2[:n]
    dens = w1.grid.integrate(prod.real)
    dens[1:] *= 2.0
    return 2.0 * math.pi * float(dens.sum())


# --- derivatives ----------------------------------------------------------------


def partial(w, axis, n_out=None):
    """Cartesian derivative ``d_1 w`` (axis=1) or ``d_2 w`` (axis=2), rescaled form.

    Mode m feeds modes m+1 and m-1.  Output is truncated at ``n_out``
    (default: the input's mode count).
    """
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    grid = w.grid
    n_in = w.n_modes
    n_out = n_in if n_out is None else n_out
    r = grid.r
    full = _full_modes(w.coeffs)
    out = np.zeros((2 * n_out + 1, grid.n_r), complex)
    for m in range(-n_in, n_in + 1):
        c = full[m + n_in]
        if not np.any(c):
            continue
        dc = grid.d(c, m)
        up = 0.5 * (dc - m * c / r) - r * c / 8.0
        down = 0.5 * (dc + m * c / r) - r * c / 8.0
        if axis == 2:
            up, down = -1j * up, 1j * down
        if abs(m + 1) <= n_out:
            out[m + 1 + n_out] += up
        if abs(m - 1) <= n_out:
            out[m - 1 + n_out] += down
    return ModeField(grid, out[n_out:])


def _full_modes(c):
    """Stack modes -N..N from the nonnegative half."""
    n = c.shape[0] - 1
    return np.concatenate([np.conj(c[:0:-1]), c], axis=0) if n > 0 else c.copy()


# --- angular synthesis ------------------------------------------------------------


def theta_grid(theta_points):
    return 2.0 * math.pi * np.arange(theta_points) / theta_points


def synth_modes(c, theta_points):
    """Real samples ``(n_r, theta_points)`` of ``sum_n c_n e^{i n theta}``."""
    n = c.shape[0] - 1
    if theta_points < 2 * n + 1:
        raise AliasingError(f"{theta_points} angles cannot carry {n} modes (need >= {2 * n + 1})")
    spec = np.zeros((theta_points // 2 + 1, c.shape[1]), complex)
    spec[: n + 1] = c * theta_points
    return sfft.irfft(spec, n=theta_points, axis=0).T


def project_modes(values, n_modes):
    """Inverse of :func:`synth_modes`: Fourier profiles for modes 0..n_modes."""
    m = values.shape[1]
    if m < 2 * n_modes + 1:
        raise AliasingError(f"{m} angles cannot carry {n_modes} modes")
    spec = sfft.rfft(values, axis=1).T / m
    out = spec[: n_modes + 1].copy()
    out[0] = out[0].real
    return out


def synthesize(w, theta_points):
    """Physical samples of ``w`` on the polar grid (rows: radius, columns: angle)."""
    return synth_modes(w.physical, theta_points)


def project(grid, samples, n_modes):
    """ModeField with modes 0..n_modes from physical polar samples."""
    return ModeField.from_physical(grid, project_modes(np.asarray(samples, float), n_modes))


# --- test-field generation ----------------------------------------------------------


def random_field(grid, n_modes, rng, max_mode=None, zero_mean=True, degree=3, scale=1.0):
    """Smooth band-limited field ``f_n = r^|n| e^{-r^2/8} P_n(r^2)`` with random coefficients."""
    max_mode = n_modes if max_mode is None else max_mode
    r2 = grid.r**2 / 4.0
    c = np.zeros((n_modes + 1, grid.n_r), complex)
    for n in range(max_mode + 1):
        a = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        if n == 0:
            a = a.real
        poly = sum(a[k] * r2**k / math.factorial(k) for k in range(degree + 1))
        c[n] = (grid.r / 2.0) ** n / math.factorial(n) ** 0.5 * np.exp(-grid.r**2 / 8.0) * poly
    w = ModeField(grid, c)
    if zero_mean:
        w = w.zero_mean()
    return w * (scale / norm_X(w))


# --- export ---------------------------------------------------------------------------


def profile_table(w, physical=True):
    """Rows for the ``r,mode_re_0,mode_im_0,...`` CSV."""
    c = w.physical if physical else w.coeffs
    cols = [w.grid.r]
    header = ["r"]
    for n in range(w.n_modes + 1):
        cols += [c[n].real, c[n].imag]
        header += [f"mode_re_{n}", f"mode_im_{n}"]
    return header, np.column_stack(cols)


def cartesian_table(w, theta_points=None):
    """Rows for the ``x1,x2,value`` CSV on the polar tensor grid."""
    theta_points = theta_points or max(4 * w.n_modes + 4, 16)
    vals = synthesize(w, theta_points)
    th = theta_grid(theta_points)
    rr, tt = np.meshgrid(w.grid.r, th, indexing="ij")
    return ["x1", "x2", "value"], np.column_stack(
        [(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel(), vals.ravel()]
    )
