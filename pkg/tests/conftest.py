"""Shared fixtures for relational-time tests."""

import math

import pytest

from relational_time.configuration.settings import RunConfig
from relational_time.core.clock import commensurate_frequency
from relational_time.core.kernel import StateVector
from relational_time.core.system import H, initial_state
from relational_time.models.domain_models import ClockRegister


@pytest.fixture
def clock64() -> ClockRegister:
    return ClockRegister(n=64, dt=1.0)


@pytest.fixture
def clock16() -> ClockRegister:
    return ClockRegister(n=16, dt=0.5)


@pytest.fixture
def clock24() -> ClockRegister:
    """Lattice where π/6 is two steps of the j = 1 frequency."""
    return ClockRegister(n=24, dt=1.0)


@pytest.fixture
def psi0() -> StateVector:
    return initial_state()


@pytest.fixture
def psi_h() -> StateVector:
    """|H>, which is not stationary under the waveplate evolution."""
    return H


@pytest.fixture
def omega64(clock64: ClockRegister) -> float:
    return commensurate_frequency(clock64, 3)


@pytest.fixture
def pi_over_6_omega(clock24: ClockRegister) -> float:
    omega = commensurate_frequency(clock24, 1)
    assert math.isclose(omega * 2 * clock24.dt, math.pi / 6)
    return omega


@pytest.fixture
def default_config() -> RunConfig:
    return RunConfig()
