"""Linear stability of the asymmetric vortices and time evolution.

Time stepping is second-order IMEX (SBDF2): the mode-diagonal part
``L - alpha Lambda`` is implicit, the strain term ``lam M``, the coupling to
the correction ``w`` and the nonlinearity are explicit (second-order
extrapolation).  The first step is IMEX Euler.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigs, gmres

from .biot_savart import advect, velocity_from_vorticity
from .errors import DomainError, GridMismatchError, NumericError
from .field_core import (
    ModeField,
    gaussian_profile,
    mg_profile,
    norm_X,
    partial,
    synthesize,
)
from .operators import ModeSolver, apply_L, apply_Lambda, apply_M


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float = 5e-3
    t_final: float = 8.0
    fit_window: tuple = (2.0, 8.0)
    order: int = 2
    record_every: int = 1
    delta: float = 0.2

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        a, b = self.fit_window
        if not 0 <= a < b <= self.t_final + 1e-12:
            raise DomainError(f"fit window {self.fit_window} must lie inside [0, t_final]")
        if self.record_every < 1:
            raise DomainError("record_every must be >= 1")

    @property
    def n_steps(self):
        return int(round(self.t_final / self.dt))


@dataclass
class StabilityReport:
    eigen_residual_1: float
    eigen_residual_2: float
    fitted_mu: float
    fit_residual: float
    energy_series: np.ndarray
    delta_hat: float
    energy_inequality_ok: bool
    leading_eigenvalue_estimate: object = None
    times: np.ndarray = field(default=None, repr=False)
    final: ModeField = field(default=None, repr=False)

    def summary(self):
        lead = self.leading_eigenvalue_estimate
        return {
            "eigen_residual_1": self.eigen_residual_1,
            "eigen_residual_2": self.eigen_residual_2,
            "fitted_mu": self.fitted_mu,
            "fit_residual": self.fit_residual,
            "delta_hat": self.delta_hat,
            "energy_inequality_ok": self.energy_inequality_ok,
            "leading_eigenvalue": None if lead is None else [[z.real, z.imag] for z in np.atleast_1d(lead)],
        }

    def csv_rows(self):
        return ["t", "norm_X", "energy", "mean"], self.energy_series


# --- linearized operator ----------------------------------------------------------


def _coupling(vortex, wt):
    """``N wt = v_w . grad wt + u_wt . grad w`` (the part of the advection due to ``w``)."""
    w = vortex.w
    n = wt.n_modes
    out = advect(velocity_from_vorticity(w), wt, n_out=n)
    out = out + advect(velocity_from_vorticity(wt), w, n_out=n)
    return out


def apply_linearized(vortex, wt):
    """``L^{alpha,lam} wt = L wt + lam M wt - alpha Lambda wt - N wt``."""
    if wt.grid.key != vortex.grid.key:
        raise GridMismatchError("perturbation and vortex live on different grids")
    wt = wt.with_modes(vortex.w.n_modes)
    out = apply_L(wt) + apply_M(wt) * vortex.lam - apply_Lambda(wt, check_mean=False) * vortex.alpha
    if vortex.lam != 0:
        out = out - _coupling(vortex, wt)
    return out


def translation_modes(vortex):
    """``(d1 omega, d2 omega)`` truncated to the vortex mode count."""
    om = vortex.omega
    return partial(om, 1, n_out=om.n_modes), partial(om, 2, n_out=om.n_modes)


def translation_residuals(vortex):
    """Relative residuals of ``L^{alpha,lam} d_i omega = -((1 +- lam)/2) d_i omega``."""
    out = []
    for mode, sign in zip(translation_modes(vortex), (1.0, -1.0)):
        ev = -(1.0 + sign * vortex.lam) / 2.0
        size = norm_X(mode)
        # omega = 0 when alpha = 0: the identity holds trivially
        out.append(norm_X(apply_linearized(vortex, mode) - mode * ev) / size if size else 0.0)
    return tuple(out)


def energy_functional(wt):
    """``(||f||^2, E(f))`` with ``f = G^{-1/2} wt`` and ``E = int |grad f|^2 + |x|^2 f^2 / 16``.

    ``f`` is exactly the stored rescaled profile; ``grad f`` has radial part
    ``f'`` and azimuthal part ``i n f / r``.
    """
    grid = wt.grid
    c = wt.coeffs
    r = grid.r
    n = np.arange(wt.n_modes + 1)
    mult = np.where(n == 0, 1.0, 2.0)
    dr = np.array([grid.d(c[k], k) for k in n])
    az = 1j * n[:, None] * c / r
    dens = np.abs(dr) ** 2 + np.abs(az) ** 2 + r**2 * np.abs(c) ** 2 / 16.0
    two_pi = 2.0 * math.pi
    norm_sq = two_pi * float(mult @ (np.abs(c) ** 2 @ grid.weights))
    energy = two_pi * float(mult @ (dens @ grid.weights))
    return norm_sq, energy


# --- time stepping ------------------------------------------------------------


class _Stepper:
    """SBDF2 for ``u' = (L - alpha Lambda) u + E(u)``."""

    def __init__(self, grid, n_modes, alpha, dt):
        self.dt = dt
        self.euler = ModeSolver(grid, n_modes, alpha, shift=1.0, scale=-dt)
        self.bdf2 = ModeSolver(grid, n_modes, alpha, shift=1.5, scale=-dt)

    def first(self, u0, e0):
        return self.euler.solve(u0 + e0 * self.dt)

    def step(self, u1, u0, e1, e0):
        return self.bdf2.solve(u1 * 2.0 - u0 * 0.5 + (e1 * 2.0 - e0) * self.dt)


def _run(stepper, u, explicit, n_steps, record, record_every, bound):
    """March ``n_steps``; ``bound`` is the X-norm treated as blow-up."""
    u_prev, e_prev = u, explicit(u)
    record(0, u)
    u = stepper.first(u_prev, e_prev)
    for k in range(1, n_steps):
        if k % record_every == 0:
            record(k, u)
        e = explicit(u)
        u, u_prev, e_prev = stepper.step(u, u_prev, e, e_prev), u, e
        nrm = norm_X(u)
        if not math.isfinite(nrm) or nrm > bound:
            raise NumericError(f"time stepping unstable at step {k + 1}; reduce dt (dt={stepper.dt})")
    if n_steps % record_every == 0:
        record(n_steps, u)
    return u


def fit_decay(times, norms, window):
    """Least-squares slope of ``log ||.||`` on ``window``: returns ``(mu, max residual)``."""
    times = np.asarray(times)
    norms = np.asarray(norms)
    mask = (times >= window[0] - 1e-12) & (times <= window[1] + 1e-12) & (norms > 0)
    if mask.sum() < 2:
        raise DomainError("fit window contains fewer than two samples")
    t, y = times[mask], np.log(norms[mask])
    coef = np.polyfit(t, y, 1)
    return float(-coef[0]), float(np.max(np.abs(np.polyval(coef, t) - y)))


def energy_inequality(times, norms, delta):
    """Largest ``(Delta ||.||^2 / Delta t) / ||.||^2`` along a trajectory, and the check at ``delta``."""
    sq = np.asarray(norms) ** 2
    dt = np.diff(times)
    rates = np.diff(sq) / dt / np.maximum(sq[:-1], 1e-300)
    worst = float(np.max(rates)) if len(rates) else -math.inf
    # tolerance: floor from roundoff in the norms
    tol = 1e-9 / float(np.min(dt)) if len(dt) else 0.0
    return worst, bool(worst <= -(1.0 - delta) + tol)


def evolve_perturbation(vortex, wt0, config=None, nonlinear=True):
    """Integrate ``wt' = L^{alpha,lam} wt - u_wt . grad wt`` from ``wt0``."""
    config = config or EvolutionConfig()
    grid, n = vortex.grid, vortex.w.n_modes
    if wt0.grid.key != grid.key:
        raise GridMismatchError("perturbation and vortex live on different grids")
    wt0 = wt0.with_modes(n)
    if abs(wt0.mean()) > 1e-9 * max(norm_X(wt0), 1e-300):
        raise DomainError("perturbations must have zero mean")
    lam = vortex.lam

    def explicit(u):
        out = apply_M(u) * lam
        if lam != 0:
            out = out - _coupling(vortex, u)
        if nonlinear:
            out = out - advect(velocity_from_vorticity(u), u, n_out=n)
        return out

    rows = []

    def record(k, u):
        nsq, en = energy_functional(u)
        rows.append((k * config.dt, math.sqrt(nsq), en, u.mean()))

    stepper = _Stepper(grid, n, vortex.alpha, config.dt)
    final = _run(stepper, wt0, explicit, config.n_steps, record, config.record_every, 1e6 * norm_X(wt0))
    series = np.array(rows)
    mu, fit_res = fit_decay(series[:, 0], series[:, 1], config.fit_window)
    worst, ok = energy_inequality(series[:, 0], series[:, 1], config.delta)
    r1, r2 = translation_residuals(vortex)
    return StabilityReport(
        eigen_residual_1=r1, eigen_residual_2=r2, fitted_mu=mu, fit_residual=fit_res,
        energy_series=series, delta_hat=1.0 + worst, energy_inequality_ok=ok,
        times=series[:, 0], final=final,
    )


@dataclass
class Trajectory:
    times: np.ndarray
    mean: np.ndarray
    min_ratio: np.ndarray
    distance: np.ndarray
    final: ModeField

    def csv_rows(self):
        return ["t", "mean", "min_over_max", "distance_X"], np.column_stack(
            [self.times, self.mean, self.min_ratio, self.distance]
        )


def evolve_nonlinear(omega0, lam, config=None, reference=None, theta_points=None):
    """Full equation ``omega' + u . grad omega = L omega + lam M omega``.

    Written as ``omega = alpha G + w`` with ``alpha`` the (conserved) mean.
    Records the mean, ``min omega / max omega`` on the polar grid and, when
    ``reference`` is given, ``||omega - reference||_X``.
    """
    config = config or EvolutionConfig()
    grid, n = omega0.grid, omega0.n_modes
    alpha = omega0.mean()
    G = gaussian_profile(grid, n)
    w0 = omega0 - G * alpha
    source = mg_profile(grid, n) * (lam * alpha)
    theta_points = theta_points or max(4 * n + 4, 32)
    if reference is not None:
        reference = reference.with_modes(n)

    def explicit(u):
        return apply_M(u) * lam + source - advect(velocity_from_vorticity(u), u, n_out=n)

    times, means, mins, dist = [], [], [], []

    def record(k, u):
        om = G * alpha + u
        vals = synthesize(om, theta_points)
        times.append(k * config.dt)
        means.append(om.mean())
        top = np.max(np.abs(vals))
        mins.append(float(vals.min() / top) if top > 0 else 0.0)
        dist.append(norm_X(om - reference) if reference is not None else float("nan"))

    stepper = _Stepper(grid, n, alpha, config.dt)
    final = _run(stepper, w0, explicit, config.n_steps, record, config.record_every, 1e6 * (1 + abs(alpha)))
    return Trajectory(np.array(times), np.array(means), np.array(mins), np.array(dist), G * alpha + final)


# --- eigenvalues -----------------------------------------------------------------


class _RealPacking:
    """Real coordinates of a ModeField without the outer boundary node.

    Layout: ``Re c_0`` then ``(Re c_n, Im c_n)`` for ``n >= 1``, interior nodes only.
    """

    def __init__(self, grid, n_modes):
        self.grid, self.n_modes = grid, n_modes
        self.k = grid.n_r - 1
        self.size = self.k * (2 * n_modes + 1)

    def pack(self, w):
        c = w.coeffs[:, : self.k]
        parts = [c[0].real]
        for n in range(1, self.n_modes + 1):
            parts += [c[n].real, c[n].imag]
        return np.concatenate(parts)

    def unpack(self, x):
        k = self.k
        c = np.zeros((self.n_modes + 1, self.grid.n_r), complex)
        c[0, :k] = x[:k]
        for n in range(1, self.n_modes + 1):
            base = k * (2 * n - 1)
            c[n, :k] = x[base : base + k] + 1j * x[base + k : base + 2 * k]
        return ModeField(self.grid, c)


def leading_eigenvalue(vortex, k=6, mean_penalty=100.0, tol=1e-10):
    """Rightmost eigenvalue estimates of ``L^{alpha,lam}`` on zero-mean fields.

    Shift-invert Arnoldi at 0; each inverse is a GMRES solve preconditioned by
    the exact mode-diagonal inverse of ``L - alpha Lambda``.  The mean
    direction is mapped to ``-mean_penalty`` to keep the problem regular.
    """
    if k < 4:
        raise DomainError("leading_eigenvalue needs k >= 4")
    grid, n = vortex.grid, vortex.w.n_modes
    pk = _RealPacking(grid, n)
    precond = ModeSolver(grid, n, vortex.alpha)

    def op(x):
        w = pk.unpack(x)
        z = w.zero_mean()
        return pk.pack(apply_linearized(vortex, z).zero_mean() - (w - z) * mean_penalty)

    def prec(x):
        w = pk.unpack(x)
        z = w.zero_mean()
        return pk.pack(precond.solve(z) - (w - z) / mean_penalty)

    a = LinearOperator((pk.size, pk.size), matvec=op, dtype=float)
    m = LinearOperator((pk.size, pk.size), matvec=prec, dtype=float)
    counts = {"gmres": 0}

    def inverse(b):
        x, info = gmres(a, b, M=m, rtol=1e-12, atol=0.0, restart=60, maxiter=50)
        counts["gmres"] += 1
        if info != 0:
            raise NumericError(f"GMRES failed (info={info}) after {counts['gmres']} solves")
        return x

    inv = LinearOperator((pk.size, pk.size), matvec=inverse, dtype=float)
    n_eig = min(2 * k, pk.size - 2)
    try:
        vals = eigs(a, k=n_eig, sigma=0.0, OPinv=inv, which="LM", tol=tol, return_eigenvectors=False)
    except Exception as exc:  # ARPACK raises its own error types
        raise NumericError(f"eigenvalue iteration failed: {exc} ({counts['gmres']} inner solves)") from exc
    vals = vals[np.abs(vals + mean_penalty) > 1e-6 * mean_penalty]
    return vals[np.argsort(-vals.real)][:k]


def perturbation_amplitude(alpha):
    return 1e-3 * (1.0 + abs(alpha))
