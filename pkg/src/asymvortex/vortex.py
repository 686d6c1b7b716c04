"""Stationary asymmetric vortices ``omega = alpha G + w`` by Picard iteration.

The correction ``w`` solves

    (L - alpha Lambda) w = -lam alpha M G - lam M w + v . grad w,

so that ``w = lam w_alpha + (L - alpha Lambda)^{-1} (v . grad w - lam M w)``
with ``w_alpha = -alpha (L - alpha Lambda)^{-1} M G``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .biot_savart import advect, velocity_from_vorticity
from .errors import ConvergenceError, DomainError, NumericError
from .field_core import (
    ModeField,
    SpectralConfig,
    g_lambda_profile,
    gaussian_profile,
    make_grid,
    mg_profile,
    norm_X,
    norm_Y,
)
from .operators import ResolventSolve, apply_L, apply_Lambda, apply_M

LAMBDA_CERTIFIED = 0.2


def _grid_and_modes(config):
    config = config or SpectralConfig()
    return config, make_grid(config), config.n_modes


def resolvent_for(grid, n_modes, alpha):
    """Cached factorization of ``L - alpha Lambda`` on ``grid``."""
    key = ("resolvent", n_modes, float(alpha))
    if key not in grid._cache:
        grid._cache[key] = ResolventSolve(grid, n_modes, alpha)
    return grid._cache[key]


def compute_w_alpha(alpha, config=None):
    """``w_alpha = -alpha (L - alpha Lambda)^{-1} M G``, a mode +-2 field."""
    config, grid, n_modes = _grid_and_modes(config)
    if alpha == 0:
        return ModeField.zeros(grid, n_modes)
    return resolvent_for(grid, n_modes, alpha).solve(mg_profile(grid, n_modes)) * (-alpha)


def nonlinear_term(w, theta_points=None):
    """``v . grad w`` with ``v`` the Biot-Savart velocity of ``w``."""
    return advect(velocity_from_vorticity(w), w, n_out=w.n_modes, theta_points=theta_points)


def stationary_residual(alpha, lam, w):
    """``L w + lam M (alpha G + w) - alpha Lambda w - v . grad w`` for the correction ``w``."""
    grid, n = w.grid, w.n_modes
    return (
        apply_L(w)
        + apply_M(w) * lam
        + mg_profile(grid, n) * (lam * alpha)
        - apply_Lambda(w, check_mean=False) * alpha
        - nonlinear_term(w)
    )


@dataclass
class VortexSolution:
    """Converged stationary vortex; ``omega = alpha G + w``."""

    alpha: float
    lam: float
    w: ModeField
    residual_X: float
    iterations: int
    contraction_estimates: list = field(default_factory=list)
    history: list = field(default_factory=list)
    certified: bool = True

    @property
    def omega(self):
        return gaussian_profile(self.w.grid, self.w.n_modes) * self.alpha + self.w

    @property
    def grid(self):
        return self.w.grid

    def summary(self):
        return {
            "alpha": self.alpha,
            "lambda": self.lam,
            "residual": self.residual_X,
            "norm_Y": norm_Y(self.w),
            "iterations": self.iterations,
            "contraction_max": max(self.contraction_estimates, default=0.0),
        }


def _check_lambda(lam):
    if not (0.0 <= lam < 1.0) or not math.isfinite(lam):
        raise DomainError(f"asymmetry lambda must lie in [0, 1), got {lam}")
    return lam <= LAMBDA_CERTIFIED


def picard_solve(alpha, lam, config=None, initial=None, damping=1.0):
    """Fixed-point iteration for the correction ``w^{alpha, lam}``.

    Stops when the Y-norm of the update falls below ``config.picard_tol``.
    ``damping`` in (0, 1] under-relaxes the update.  Values of ``lam`` above
    0.2 run but are flagged ``certified = False``.
    """
    config, grid, n_modes = _grid_and_modes(config)
    certified = _check_lambda(lam)
    if not 0.0 < damping <= 1.0:
        raise DomainError(f"damping must lie in (0, 1], got {damping}")
    solver = resolvent_for(grid, n_modes, alpha)
    w_alpha = compute_w_alpha(alpha, config)
    base = w_alpha * lam
    w = base if initial is None else initial.with_modes(n_modes)
    history, ratios = [], []
    for it in range(1, config.picard_max_iter + 1):
        rhs = nonlinear_term(w) - apply_M(w) * lam
        new = base + solver.solve(rhs.zero_mean())
        if damping != 1.0:
            new = w * (1.0 - damping) + new * damping
        step = norm_Y(new - w)
        if not math.isfinite(step):
            raise NumericError(f"Picard iterate became non-finite at step {it}")
        if history and history[-1] > 0:
            ratios.append(step / history[-1])
        history.append(step)
        w = new
        if step <= config.picard_tol:
            res = norm_X(stationary_residual(alpha, lam, w))
            return VortexSolution(alpha, lam, w, res, it, ratios, history, certified)
    raise ConvergenceError(
        f"Picard did not converge in {config.picard_max_iter} iterations "
        f"(alpha={alpha}, lambda={lam}, last update {history[-1]:.3e})",
        history,
    )


# --- asymptotic checks -----------------------------------------------------------


def expansion_check_lambda(alpha, lam, config=None):
    """``d(lam) = ||w^{alpha,lam} - lam w_alpha||_Y`` at ``lam`` and ``lam/2`` and their ratio."""
    w_alpha = compute_w_alpha(alpha, config)
    d = []
    for value in (lam, lam / 2.0):
        sol = picard_solve(alpha, value, config)
        d.append(norm_Y(sol.w - w_alpha * value))
    ratio = d[0] / d[1] if d[1] > 0 else float("nan")
    return {"alpha": alpha, "lambda": lam, "d": d[0], "d_half": d[1], "ratio": ratio}


def large_R_check(lam, alphas, config=None, w_inf=None):
    """Deviations from the large-circulation expansion ``omega/alpha ~ G + (lam/alpha) w_inf``.

    ``deviation`` is ``||alpha^{-1} omega - G - (lam/alpha) w_inf||_Y`` and
    ``direction`` is ``||(w/lam - w_inf)_{mode 2}||_Y``, the distance of the
    leading correction to ``w_inf``.
    """
    config, grid, n_modes = _grid_and_modes(config)
    if w_inf is None:
        from .winfty import compute_w_infty

        w_inf = compute_w_infty(grid, n_modes)[1]
    w_inf = w_inf.with_modes(n_modes)
    rows = []
    for alpha in alphas:
        if abs(alpha) < 1:
            raise DomainError(f"large_R_check needs |alpha| >= 1, got {alpha}")
        sol = picard_solve(alpha, lam, config)
        if lam == 0:
            dev = direc = 0.0
        else:
            dev = norm_Y((sol.w - w_inf * lam) / alpha)
            direc = norm_Y((sol.w / lam - w_inf).keep_modes([2]))
        rows.append({"alpha": alpha, "deviation": dev, "direction": direc})
    return rows


def small_R_check(lam, alphas, config=None):
    """``||omega^{alpha,lam} - alpha G_lam||_Y`` for small circulations.

    Also reports ``first_order = ||w - lam alpha M G||_Y / (alpha lam ||M G||_Y)``,
    which tends to zero with ``alpha`` and ``lam``.
    """
    config, grid, n_modes = _grid_and_modes(config)
    g_lam = g_lambda_profile(lam, grid, n_modes)
    mg = mg_profile(grid, n_modes)
    rows = []
    for alpha in alphas:
        if abs(alpha) > 1:
            raise DomainError(f"small_R_check needs |alpha| <= 1, got {alpha}")
        sol = picard_solve(alpha, lam, config)
        dev = norm_Y(sol.omega - g_lam * alpha)
        scale = abs(alpha) * lam * norm_Y(mg)
        first = norm_Y(sol.w - mg * (lam * alpha)) / scale if scale else 0.0
        rows.append({"alpha": alpha, "deviation": dev, "first_order": first})
    return rows


def quadratic_ratio(rows, key="deviation"):
    """Ratio of consecutive entries, for halving tests."""
    vals = [row[key] for row in rows]
    return [a / b if b else float("nan") for a, b in zip(vals, vals[1:])]


def restart_spread(alpha, lam, config=None, samples=10, rng=None):
    """Max Y-distance between Picard fixed points started from random in-ball guesses."""
    from .field_core import random_field

    config, grid, n_modes = _grid_and_modes(config)
    rng = rng or np.random.default_rng(0)
    ref = picard_solve(alpha, lam, config)
    radius = 2.0 * max(norm_Y(ref.w), 1e-12)
    spread = 0.0
    for _ in range(samples):
        pert = random_field(grid, n_modes, rng, max_mode=min(n_modes, 6))
        # keep the pi-rotation symmetry of the problem
        pert = pert.keep_modes(range(0, n_modes + 1, 2))
        guess = ref.w + pert * (0.5 * radius * rng.uniform() / max(norm_Y(pert), 1e-300))
        sol = picard_solve(alpha, lam, config, initial=guess)
        spread = max(spread, norm_Y(sol.w - ref.w))
    return spread
