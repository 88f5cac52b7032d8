import numpy as np
import pytest

from relaxns.model import FluidParams, InitConfig, RadialGrid, State


@pytest.fixture
def params():
    return FluidParams(gamma=1.4, mu=1.0, lambda_=1.0, tau=0.01, eps=0.0, a_coef=1.0)


@pytest.fixture
def grid():
    return RadialGrid(r_max=11.0, n_cells=100)


@pytest.fixture
def bump_cfg():
    return InitConfig(bump_amp=0.01, bump_center=5.0, bump_width=0.7, vel_amp=0.01)


def equilibrium_state(n):
    z = np.zeros(n)
    return State(np.ones(n), z.copy(), z.copy(), z.copy())


@pytest.fixture
def equilibrium(grid):
    return equilibrium_state(grid.n_cells)
