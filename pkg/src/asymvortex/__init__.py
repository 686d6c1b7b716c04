"""Asymmetric Burgers vortices: spectral discretization, stationary solutions and stability."""

from .errors import (
    AliasingError,
    ConfigError,
    ConvergenceError,
    DomainError,
    GridMismatchError,
    NumericError,
)
from .field_core import ModeField, RadialGrid, SpectralConfig, make_grid, norm_X, norm_Y
from .stability import (
    EvolutionConfig,
    StabilityReport,
    evolve_nonlinear,
    evolve_perturbation,
    leading_eigenvalue,
)
from .vortex import VortexSolution, compute_w_alpha, picard_solve
from .winfty import WInftyProfile, compute_w_infty, compute_z_infty

__all__ = [
    "AliasingError",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "EvolutionConfig",
    "GridMismatchError",
    "ModeField",
    "NumericError",
    "RadialGrid",
    "SpectralConfig",
    "StabilityReport",
    "VortexSolution",
    "WInftyProfile",
    "compute_w_alpha",
    "compute_w_infty",
    "compute_z_infty",
    "evolve_nonlinear",
    "evolve_perturbation",
    "leading_eigenvalue",
    "make_grid",
    "norm_X",
    "norm_Y",
    "picard_solve",
]
