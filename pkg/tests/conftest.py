import math

import numpy as np
import pytest

from asymvortex.field_core import SpectralConfig, make_grid

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def config():
    return SpectralConfig()


@pytest.fixture(scope="session")
def grid(config):
    return make_grid(config)


@pytest.fixture(scope="session")
def n_modes(config):
    return config.n_modes


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def cartesian_integral(func, half_width=14.0, n=561):
    """Trapezoid rule on a square; spectrally accurate for Gaussian-decaying integrands."""
    x = np.linspace(-half_width, half_width, n)
    h = x[1] - x[0]
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    return float(np.sum(func(x1, x2)) * h * h)


def gaussian(x1, x2):
    return np.exp(-(x1**2 + x2**2) / 4.0) / (4.0 * math.pi)


def polar_points(grid, theta_points):
    th = 2.0 * math.pi * np.arange(theta_points) / theta_points
    rr, tt = np.meshgrid(grid.r, th, indexing="ij")
    return rr * np.cos(tt), rr * np.sin(tt)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
