"""Discretized clock: time eigenstates, momentum operator and clock Hamiltonian."""

from functools import lru_cache

import numpy as np
import structlog

from ..models.domain_models import ClockRegister
from ..utils.exceptions import CommensurabilityError, LatticeIndexError
from .kernel import Operator, StateVector, basis_state, dft

logger = structlog.get_logger()


def time_eigenstate(clock: ClockRegister, k: int) -> StateVector:
    """Position eigenstate |t_k> of the clock.

    Raises:
        LatticeIndexError: If k is outside [0, n)
    """
    if not 0 <= k < clock.n:
        raise LatticeIndexError(f"Clock index {k} outside [0, {clock.n})")
    return basis_state((clock.n,), k)


@lru_cache(maxsize=32)
def _momentum_entries(n: int, dt: float) -> np.ndarray:
    fourier = dft(n).entries
    frequencies = 2.0 * np.pi * np.fft.fftfreq(n, d=dt)
    omega = fourier @ np.diag(frequencies) @ fourier.conj().T
    # F diag F† is Hermitian up to rounding; symmetrize so the flag check is exact
    omega = 0.5 * (omega + omega.conj().T)
    omega.setflags(write=False)
    logger.debug("momentum_operator_built", n=n, dt=dt)
    return omega


def momentum_operator(clock: ClockRegister) -> Operator:
    """Clock momentum Ω = F·diag(ω_m)·F† with centered frequencies ω_m = 2π·m̃/(n·dt)."""
    return Operator(_momentum_entries(clock.n, clock.dt), (clock.n,), hermitian=True)


def clock_hamiltonian(clock: ClockRegister) -> Operator:
    """H_c = ħΩ."""
    omega = momentum_operator(clock)
    return Operator(clock.hbar * omega.entries, omega.dims, hermitian=True)


def commensurate_frequency(clock: ClockRegister, j: int) -> float:
    """Angular frequency 2π·j/(n·dt); both ±ω are exact eigenvalues of Ω.

    Args:
        clock: Clock register
        j: Harmonic index, 1 <= j <= n/2 - 1

    Returns:
        Angular frequency on the momentum grid

    Raises:
        CommensurabilityError: If j violates the Nyquist rule
    """
    if not 1 <= j <= clock.n // 2 - 1:
        raise CommensurabilityError(
            f"Harmonic j={j} violates the Nyquist rule 1 <= j <= n/2 - 1 = {clock.n // 2 - 1}"
        )
    return 2.0 * np.pi * j / (clock.n * clock.dt)


def plane_wave(clock: ClockRegister, omega: float) -> StateVector:
    """Σ_k exp(iω t_k)|t_k>/√n."""
    amplitudes = np.exp(1j * omega * clock.times) / np.sqrt(clock.n)
    return StateVector(amplitudes, (clock.n,))


def is_commensurate(clock: ClockRegister, omega: float, tol: float = 1e-9) -> bool:
    """True when ω sits on the momentum grid (both ±ω are eigenvalues of Ω)."""
    harmonic = omega * clock.n * clock.dt / (2.0 * np.pi)
    nearest = round(harmonic)
    return abs(harmonic - nearest) <= tol and abs(nearest) <= clock.n // 2 - 1
