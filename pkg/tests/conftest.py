"""Shared fixtures: the reference parameter presets and heavy trajectories."""

import math

import numpy as np
import pytest

from kerrpo import ModelParams, integrate_wn

PI = math.pi


@pytest.fixture(scope="session")
def fig1_params():
    return ModelParams(omega0=1.0, kappa=0.05, chi=0.0, z=3 + 3j, alpha0=math.sqrt(18.0))


@pytest.fixture(scope="session")
def fig2a_params():
    return ModelParams(omega0=1.0, kappa=0.05, chi=0.0, z=2.0, alpha0=2.0)


@pytest.fixture(scope="session")
def fig2b_params():
    return ModelParams(omega0=1.0, kappa=0.0, chi=0.25, z=2.0, alpha0=2.0)


@pytest.fixture(scope="session")
def fig3_params():
    return ModelParams(omega0=1.0, kappa=0.25, chi=0.25, z=2.0, alpha0=2.0)


@pytest.fixture(scope="session")
def fig1_traj(fig1_params):
    return integrate_wn(fig1_params, t_end=6 * PI, sample_dt=PI / 2)


@pytest.fixture(scope="session")
def fig2a_traj(fig2a_params):
    return integrate_wn(fig2a_params, t_end=8 * PI, sample_dt=8 * PI / 2000)


@pytest.fixture(scope="session")
def fig3_traj(fig3_params):
    return integrate_wn(fig3_params, t_end=8 * PI, sample_dt=8 * PI / 2000)


def poisson_pmf(mean: float, n: int) -> np.ndarray:
    """Exact Poisson weights by stable recurrence (independent of the package)."""
    out = np.empty(n)
    out[0] = math.exp(-mean)
    for k in range(1, n):
        out[k] = out[k - 1] * mean / k
    return out
