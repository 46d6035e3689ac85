"""Two-level system: photon polarization in the ordered basis (|H>, |V>)."""

from typing import Sequence

import numpy as np

from ..utils.exceptions import InvalidStateError
from .kernel import NORM_TOL, Operator, StateVector

PAULI_X = Operator(np.array([[0, 1], [1, 0]]), (2,), unitary=True, hermitian=True)

H = StateVector(np.array([1.0, 0.0]), (2,))
V = StateVector(np.array([0.0, 1.0]), (2,))


def qubit(amplitudes: Sequence[complex]) -> StateVector:
    """Normalized qubit from (⟨H|ψ⟩, ⟨V|ψ⟩).

    Raises:
        InvalidStateError: If the pair is not normalized within 1e-12
    """
    state = StateVector(np.asarray(amplitudes, dtype=np.complex128), (2,))
    if abs(state.norm - 1.0) > NORM_TOL:
        raise InvalidStateError(f"Qubit amplitudes have norm {state.norm}, expected 1")
    return state


def initial_state() -> StateVector:
    """(|H> + |V>)/√2, the +1 eigenstate of σ_x."""
    return qubit([1 / np.sqrt(2), 1 / np.sqrt(2)])


def evolution_stack(phases: np.ndarray) -> np.ndarray:
    """exp(iδσ_x) for every δ in ``phases``; shape (len(phases), 2, 2)."""
    phases = np.asarray(phases, dtype=float)
    cos = np.cos(phases)
    isin = 1j * np.sin(phases)
    stack = np.empty(phases.shape + (2, 2), dtype=np.complex128)
    stack[..., 0, 0] = cos
    stack[..., 0, 1] = isin
    stack[..., 1, 0] = isin
    stack[..., 1, 1] = cos
    return stack


def evolution(delta: float) -> Operator:
    """Waveplate of optical thickness δ: [[cos δ, i sin δ], [i sin δ, cos δ]]."""
    return Operator(evolution_stack(np.array(delta)), (2,), unitary=True)


def system_hamiltonian(omega: float) -> Operator:
    """H_s = -ħω σ_x, so exp(-iH_s t/ħ) = evolution(ωt)."""
    return Operator(-omega * PAULI_X.entries, (2,), hermitian=True)


def measurement_basis(rotation: Operator | None = None) -> Operator:
    """Measurement eigenbasis as a unitary whose columns are |a=+1>, |a=-1>.

    The default is the {|H>, |V>} basis.
    """
    if rotation is None:
        return Operator(np.eye(2), (2,), unitary=True, hermitian=True)
    if rotation.dims != (2,):
        raise InvalidStateError(f"Basis rotation must act on one qubit, got dims {rotation.dims}")
    return Operator(rotation.entries, (2,), unitary=True)
