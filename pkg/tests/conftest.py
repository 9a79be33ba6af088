"""Shared fixtures: growth profiles and solutions that are expensive to build"""

import pytest

from modules.asymptotics import GrowthProfile
from modules.nonlinearity import Nonlinearity
from modules.pde_solver import PolarGrid, solve_disk
from modules.radial_solver import solve_unit_ball


@pytest.fixture(scope='session')
def power3():
    return GrowthProfile(Nonlinearity.power(3))


@pytest.fixture(scope='session')
def osc3():
    return GrowthProfile(Nonlinearity.oscillatory_power(3))


@pytest.fixture(scope='session')
def power3_radial(power3):
    """Unit-ball radial solution of Δu = u³ in the plane"""
    return solve_unit_ball(power3, 2)


@pytest.fixture(scope='session')
def coarse_grid():
    return PolarGrid.build(32, 32)


@pytest.fixture(scope='session')
def symmetric_disk(power3, power3_radial, coarse_grid):
    return solve_disk(power3, 20.0, 0.0, 0, coarse_grid, power3_radial)


@pytest.fixture(scope='session')
def perturbed_disk(power3, power3_radial, coarse_grid):
    return solve_disk(power3, 20.0, 0.1, 1, coarse_grid, power3_radial)


@pytest.fixture(scope='session')
def osc3_radial(osc3):
    """Unit-ball radial solution of Δu = u³(1 + sin u) in the plane"""
    return solve_unit_ball(osc3, 2)
