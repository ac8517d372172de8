"""
Shared fixtures for the test suite
"""

import numpy as np
import pytest

from src.geometry.domain import DomainSpec
from src.geometry.scenario import generate_scenario, piecewise_scenario


@pytest.fixture
def unit_ball():
    return DomainSpec.ball([0.0, 0.0], 1.0)


@pytest.fixture
def unit_box():
    return DomainSpec.box([0.0, 0.0], [1.0, 1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def four_stage_scenario(unit_ball):
    """Zero-jitter scenario, each stage's comparator loss is 0"""
    return piecewise_scenario(256, unit_ball, [[0.5, 0.0], [-0.5, 0.0], [0.0, 0.5], [0.0, -0.5]])


@pytest.fixture
def four_stage_losses(four_stage_scenario):
    return generate_scenario(four_stage_scenario)


@pytest.fixture
def jittered_scenario(unit_ball):
    return piecewise_scenario(512, unit_ball, [[0.6, 0.2], [-0.4, -0.3]], jitter=0.1, seed=7)
