"""Linear operators L, M, Lambda and the resolvent (L - alpha Lambda)^{-1}.

All operators act on the rescaled profiles ``f = G^{-1/2} w`` held by
:class:`ModeField`.  Per mode ``n`` (``Lap_n`` the radial Laplacian):

* ``L``:      ``Lap_n f - r^2 f / 16 + f / 2``  (minus the 2D oscillator)
* ``Lambda``: ``i n (phi f - (1/2) G^{1/2} psi_n[G^{1/2} f])``
* ``M``:      couples mode ``m`` to ``m +- 2``.
"""


import numpy as np
from scipy import linalg

from .biot_savart import radial_laplacian, stream_matrix, streamfunction_mode
from .errors import DomainError, NumericError
from .field_core import ModeField, _full_modes


def L_matrix(grid, n):
    """Matrix of ``G^{-1/2} L G^{1/2}`` on mode ``n`` (no boundary row)."""
    r = grid.r
    return radial_laplacian(grid, n) + np.diag(0.5 - r**2 / 16.0)


def _L_mats(grid, n_max):
    key = ("L", n_max)
    if key not in grid._cache:
        grid._cache[key] = [L_matrix(grid, n) for n in range(n_max + 1)]
    return grid._cache[key]


def apply_L(w):
    """``L w = Lap w + (1/2) x.grad w + w``, mode by mode."""
    mats = _L_mats(w.grid, w.n_modes)
    return ModeField(w.grid, np.array([mats[n] @ w.coeffs[n] for n in range(w.n_modes + 1)]))


def apply_M(w, n_out=None):
    """``M w = (1/2)(x1 d1 - x2 d2) w``; modes beyond ``n_out`` are dropped."""
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
        rdc = r * grid.d(c, m)
        common = 0.25 * rdc - r**2 * c / 16.0
        if abs(m + 2) <= n_out:
            out[m + 2 + n_out] += common - 0.25 * m * c
        if abs(m - 2) <= n_out:
            out[m - 2 + n_out] += common + 0.25 * m * c
    return ModeField(grid, out[n_out:])


def truncation_norm_M(w):
    """X-norm of the part of ``M w`` pushed beyond the retained modes."""
    from .field_core import norm_X

    n = w.n_modes
    full = apply_M(w, n_out=n + 2)
    return norm_X(full.keep_modes([n + 1, n + 2]))


def _check_zero_mean(w, rtol=1e-6):
    from .field_core import norm_X

    scale = max(norm_X(w), 1e-300)
    # |int w| <= ||w||_X ||G||_X = ||w||_X, so this ratio is scale-free
    if abs(w.mean()) > rtol * scale:
        raise DomainError(f"Lambda is defined on zero-mean fields; mean = {w.mean():.3e}")


def apply_Lambda(w, check_mean=True):
    """``Lambda w = v^G . grad w + v . grad G``; block-diagonal in the modes."""
    if check_mean:
        _check_zero_mean(w)
    grid = w.grid
    sg = grid.sqrt_g
    out = np.zeros_like(w.coeffs)
    for n in range(1, w.n_modes + 1):
        f = w.coeffs[n]
        if not np.any(f):
            continue
        psi = streamfunction_mode(grid, n, sg * f)
        out[n] = 1j * n * (grid.phi * f - 0.5 * sg * psi)
    return ModeField(grid, out)


def mode_system(grid, n, alpha, shift=0.0, scale=1.0):
    """Dense block matrix of ``shift + scale (L - alpha Lambda)`` on mode ``n``.

    Unknowns are ``[f, psi]`` for ``n >= 1`` (the streamfunction is carried
    along so that the nonlocal part of Lambda is exact) and ``f`` alone for
    ``n = 0``.  The outer boundary rows impose ``f(r_max) = 0`` and the
    streamfunction decay condition.
    """
    k = grid.n_r
    top = shift * np.eye(k) + scale * L_matrix(grid, n)
    if n == 0:
        top = top.astype(complex)
        top[-1] = 0.0
        top[-1, -1] = 1.0
        return top
    sg = grid.sqrt_g
    a = np.zeros((2 * k, 2 * k), complex)
    a[:k, :k] = top - scale * alpha * 1j * n * np.diag(grid.phi)
    a[:k, k:] = scale * alpha * 0.5j * n * np.diag(sg)
    a[k:, k:] = stream_matrix(grid, n)
    a[k:, :k] = -np.diag(sg)
    a[k - 1] = 0.0
    a[k - 1, k - 1] = 1.0
    a[-1, :k] = 0.0
    return a


class ModeSolver:
    """Factorized ``shift + scale (L - alpha Lambda)`` for modes 0..n_modes.

    With ``shift == 0`` the mode-0 block is bordered by the zero-mean
    constraint, since ``L`` annihilates ``G`` there.
    """

    def __init__(self, grid, n_modes, alpha, shift=0.0, scale=1.0):
        self.grid = grid
        self.n_modes = n_modes
        self.alpha = float(alpha)
        self.shift = shift
        self.scale = scale
        self._lu = []
        for n in range(n_modes + 1):
            a = mode_system(grid, n, alpha, shift, scale)
            if n == 0 and shift == 0.0:
                a = self._border(a)
            lu = linalg.lu_factor(a, check_finite=False)
            diag = np.abs(np.diag(lu[0]))
            if not np.all(np.isfinite(diag)) or diag.min() <= 1e-14 * diag.max():
                raise NumericError(f"factorization of the mode-{n} block failed")
            self._lu.append(lu)

    def _border(self, a):
        k = self.grid.n_r
        kern = self.grid.sqrt_g
        b = np.zeros((k + 1, k + 1), complex)
        b[:k, :k] = a
        b[:k, k] = kern
        b[k, :k] = self.grid.weights * kern
        return b

    def solve(self, rhs):
        if rhs.grid.key != self.grid.key:
            from .errors import GridMismatchError

            raise GridMismatchError("right-hand side lives on another grid")
        k = self.grid.n_r
        rhs = rhs.with_modes(self.n_modes)
        out = np.zeros_like(rhs.coeffs)
        for n in range(self.n_modes + 1):
            b = rhs.coeffs[n].copy()
            b[-1] = 0.0
            if n == 0:
                if self.shift == 0.0:
                    b = np.append(b, 0.0)
                out[0] = linalg.lu_solve(self._lu[0], b)[:k].real
            else:
                if not np.any(b):
                    continue
                full = np.concatenate([b, np.zeros(k, complex)])
                out[n] = linalg.lu_solve(self._lu[n], full)[:k]
        return ModeField(self.grid, out)


class ResolventSolve(ModeSolver):
    """Reusable ``(L - alpha Lambda)^{-1}`` on zero-mean fields."""

    def __init__(self, grid, n_modes, alpha):
        super().__init__(grid, n_modes, alpha)


def solve_resolvent(alpha, rhs):
    """``(L - alpha Lambda)^{-1} rhs`` for a zero-mean right-hand side."""
    _check_zero_mean(rhs)
    return ResolventSolve(rhs.grid, rhs.n_modes, alpha).solve(rhs)


def apply_L_minus_alpha_Lambda(alpha, w):
    return apply_L(w) - alpha * apply_Lambda(w, check_mean=False)


def spectrum_L(grid, k):
    """The ``k`` smallest eigenvalues of ``-L`` on zero-mean fields, with multiplicity.

    Each mode ``n >= 1`` contributes twice (``+-n``).  Computed by dense
    eigensolves of the per-mode blocks with ``f(r_max) = 0``.
    """
    if k > grid.n_r // 2:
        raise ValueError(f"k={k} exceeds the resolvable part of the spectrum")
    found = []
    n = 0
    while True:
        a = -L_matrix(grid, n)[:-1, :-1]
        vals, vecs = linalg.eig(a)
        if np.max(np.abs(vals.imag)) > 1e-6 * np.max(np.abs(vals.real)):
            raise NumericError(f"non-real spectrum in mode {n}")
        vals = vals.real
        if n == 0:
            # discard the Gaussian itself (the eigenvalue 0 outside X)
            kern = grid.sqrt_g[:-1]
            overlap = np.abs(kern @ (grid.weights[:-1, None] * vecs)) / np.linalg.norm(vecs, axis=0)
            vals = np.delete(vals, np.argmax(overlap))
        vals = np.sort(vals)
        found.extend(vals.tolist() * (1 if n == 0 else 2))
        found.sort()
        n += 1
        if len(found) >= k and n / 2.0 > found[k - 1] + 1.0:
            break
    return found[:k]


def resolvent_bound(alpha, grid, n_modes, rng, samples=8):
    """Largest sampled ``||(L - alpha Lambda)^{-1} f||_Y / ||f||_X`` over random zero-mean f."""
    from .field_core import norm_Y, random_field

    solver = ResolventSolve(grid, n_modes, alpha)
    best = 0.0
    for _ in range(samples):
        f = random_field(grid, n_modes, rng, max_mode=min(n_modes, 4))
        best = max(best, norm_Y(solver.solve(f)))
    return best


def skew_defect(w1, w2):
    """``(w1, Lambda w2)_X + (Lambda w1, w2)_X``."""
    from .field_core import inner_X

    return inner_X(w1, apply_Lambda(w2)) + inner_X(apply_Lambda(w1), w2)

