"""Tests for the discretized clock."""

import math

import numpy as np
import pytest

from relational_time.core.clock import (
    clock_hamiltonian,
    commensurate_frequency,
    is_commensurate,
    momentum_operator,
    plane_wave,
    time_eigenstate,
)
from relational_time.models.domain_models import ClockRegister
from relational_time.utils.exceptions import CommensurabilityError, LatticeIndexError


@pytest.mark.unit
class TestClockRegister:
    @pytest.mark.parametrize("n", [2, 7, 0])
    def test_rejects_odd_or_small_lattices(self, n):
        with pytest.raises(ValueError):
            ClockRegister(n=n, dt=1.0)

    def test_rejects_nonpositive_spacing(self):
        with pytest.raises(ValueError):
            ClockRegister(n=8, dt=0.0)

    def test_times_and_span(self):
        clock = ClockRegister(n=8, dt=0.25)
        np.testing.assert_allclose(clock.times, np.arange(8) * 0.25)
        assert clock.span == 2.0


@pytest.mark.unit
class TestTimeEigenstates:
    def test_basis_vector(self, clock16):
        state = time_eigenstate(clock16, 3)
        assert state.dims == (16,)
        assert state.amplitudes[3] == 1.0
        assert state.norm == 1.0

    @pytest.mark.parametrize("k", [-1, 16])
    def test_out_of_range(self, clock16, k):
        with pytest.raises(LatticeIndexError):
            time_eigenstate(clock16, k)


@pytest.mark.unit
class TestMomentum:
    def test_momentum_is_hermitian(self, clock64):
        entries = momentum_operator(clock64).entries
        np.testing.assert_allclose(entries, entries.conj().T, atol=1e-12)

    def test_spectrum_is_centered_grid(self, clock16):
        eigenvalues = np.linalg.eigvalsh(momentum_operator(clock16).entries)
        expected = np.sort(clock16.frequencies)
        np.testing.assert_allclose(eigenvalues, expected, atol=1e-10)

    @pytest.mark.parametrize("j", [1, 3, 31, -5])
    def test_plane_wave_is_eigenvector(self, clock64, j):
        omega = 2 * math.pi * j / clock64.span
        wave = plane_wave(clock64, omega)
        image = momentum_operator(clock64).entries @ wave.amplitudes
        np.testing.assert_allclose(image, omega * wave.amplitudes, rtol=0, atol=1e-11)

    @pytest.mark.parametrize("n,dt", [(4, 1.0), (16, 0.5), (64, 1.0), (128, 0.25)])
    def test_clock_hamiltonian_trace(self, n, dt):
        # fftfreq keeps -n/2 and drops +n/2
        trace = np.trace(clock_hamiltonian(ClockRegister(n=n, dt=dt)).entries)
        assert trace.real == pytest.approx(-math.pi / dt, abs=1e-10)
        assert abs(trace.imag) <= 1e-12

    def test_rebuild_is_deterministic(self):
        first = momentum_operator(ClockRegister(n=64, dt=1.0)).entries
        second = momentum_operator(ClockRegister(n=64, dt=1.0)).entries
        np.testing.assert_allclose(first, second, rtol=0, atol=1e-13)

    @pytest.mark.parametrize("j", [1, 3, 7, -5])
    def test_plane_wave_eigen_relation_fine_spacing(self, clock16, j):
        omega = math.copysign(commensurate_frequency(clock16, abs(j)), j)
        wave = plane_wave(clock16, omega)
        image = momentum_operator(clock16).entries @ wave.amplitudes
        np.testing.assert_allclose(image, omega * wave.amplitudes, rtol=0, atol=1e-11)

    def test_clock_hamiltonian_uses_unit_hbar(self, clock16):
        np.testing.assert_array_equal(
            clock_hamiltonian(clock16).entries, momentum_operator(clock16).entries
        )


@pytest.mark.unit
class TestCommensurability:
    def test_default_frequency(self, clock64):
        assert commensurate_frequency(clock64, 3) == pytest.approx(2 * math.pi * 3 / 64)

    @pytest.mark.parametrize("j", [0, 32, 40, -1])
    def test_nyquist_rule(self, clock64, j):
        with pytest.raises(CommensurabilityError, match="Nyquist"):
            commensurate_frequency(clock64, j)

    def test_is_commensurate(self, clock64):
        assert is_commensurate(clock64, commensurate_frequency(clock64, 5))
        assert not is_commensurate(clock64, 0.3)
        assert not is_commensurate(clock64, 2 * math.pi * 32 / 64)

    @pytest.mark.parametrize("j", [1, 3, 31])
    def test_doubling_spacing_halves_frequency(self, j):
        fine = commensurate_frequency(ClockRegister(n=64, dt=1.0), j)
        coarse = commensurate_frequency(ClockRegister(n=64, dt=2.0), j)
        assert coarse == pytest.approx(fine / 2, rel=1e-15)
