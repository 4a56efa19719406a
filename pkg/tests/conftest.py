from __future__ import annotations

import pytest

from ecodrive import CostWeights, default_parameters
from ecodrive.route import RouteSegment
from ecodrive.solver import SolverConfig, shoot
from ecodrive.units import kmh_to_ms


@pytest.fixture(scope="session")
def params():
    return default_parameters()


@pytest.fixture(scope="session")
def weights():
    return CostWeights()


@pytest.fixture(scope="session")
def config():
    return SolverConfig()


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels(params, weights):
    """Compile the numba kernels once before any timed assertion runs."""
    seg = RouteSegment.straight(40.0, 0.0, kmh_to_ms(80.0),
                                kmh_to_ms(80.0), kmh_to_ms(80.0))
    shoot(seg, weights, SolverConfig(step_length=10.0), params)


def straight(length, slope_rad, limit_kmh, entry_kmh, exit_kmh, start=0.0):
    """Synthetic constant-slope segment with km/h boundaries."""
    return RouteSegment.straight(
        length, slope_rad, kmh_to_ms(limit_kmh),
        kmh_to_ms(entry_kmh), kmh_to_ms(exit_kmh), start_position=start)
