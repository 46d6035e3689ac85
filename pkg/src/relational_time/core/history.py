"""Global history states over clock ⊗ system ⊗ memories.

A history state lists, for every clock reading t_k, the conditioned state of
everything else. Measurements are von Neumann interactions that copy the
system's eigenbasis label into a three-level memory (|r>, |+1>, |-1>) at an
instantaneous clock index; the record is visible from that index onward.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

import numpy as np
import scipy.linalg
import structlog

from ..models.domain_models import ClockRegister
from ..utils.exceptions import (
    DimensionMismatchError,
    InvalidStateError,
    LatticeIndexError,
    MeasurementLayoutError,
)
from .clock import clock_hamiltonian
from .kernel import (
    Operator,
    StateVector,
    apply,
    basis_state,
    compose,
    expm,
    identity,
    kron,
    max_norm_distance,
    tensor,
)
from .system import evolution, evolution_stack, measurement_basis, system_hamiltonian

logger = structlog.get_logger()

MEMORY_DIM = 3


class MemoryLevel(IntEnum):
    """Memory basis order: ready state, then the record of outcome +1 and -1."""

    READY = 0
    PLUS = 1
    MINUS = 2


@dataclass(frozen=True)
class HistoryState:
    """Normalized history state with its region bookkeeping.

    ``state`` has dims [n, 2] plus one memory factor of dimension 3 per
    measurement. ``ka``/``kb`` are the clock indices at which the first and
    second records appear.
    """

    state: StateVector
    clock: ClockRegister
    omega: float
    psi0: StateVector
    ka: Optional[int] = None
    kb: Optional[int] = None
    basis_a: Optional[Operator] = None
    basis_b: Optional[Operator] = None

    @property
    def measurement_count(self) -> int:
        return (self.ka is not None) + (self.kb is not None)

    @property
    def gap_phase(self) -> float:
        """ω(t_b - t_a) of a double-measurement history."""
        if self.ka is None or self.kb is None:
            raise MeasurementLayoutError("Gap phase needs two measurements")
        return self.omega * (self.kb - self.ka) * self.clock.dt

    def region_of(self, k: int) -> int:
        """1 before the first record, 2 between records, 3 after the second."""
        if self.ka is not None and k >= self.ka:
            if self.kb is not None and k >= self.kb:
                return 3
            return 2
        return 1


def _record_permutation(level: int) -> np.ndarray:
    """Memory cycle r -> level -> other record -> r, as a permutation matrix."""
    other = MemoryLevel.MINUS if level == MemoryLevel.PLUS else MemoryLevel.PLUS
    image = {MemoryLevel.READY: level, level: other, other: MemoryLevel.READY}
    permutation = np.zeros((MEMORY_DIM, MEMORY_DIM))
    for source, target in image.items():
        permutation[target, source] = 1.0
    return permutation


def record_unitary(basis: Optional[Operator] = None) -> Operator:
    """Von Neumann interaction on system ⊗ memory.

    |a>|r> -> |a>|a>, completed to a unitary by cycling the memory levels
    conditioned on the measured eigenvector.
    """
    basis = measurement_basis(basis)
    entries = np.zeros((2 * MEMORY_DIM, 2 * MEMORY_DIM), dtype=np.complex128)
    for index, level in enumerate((MemoryLevel.PLUS, MemoryLevel.MINUS)):
        eigenvector = basis.entries[:, index]
        projector = np.outer(eigenvector, eigenvector.conj())
        entries += np.kron(projector, _record_permutation(level))
    return Operator(entries, (2, MEMORY_DIM), unitary=True)


def _second_record_unitary(basis: Optional[Operator] = None) -> Operator:
    """Record interaction on system ⊗ memory_1 ⊗ memory_2 writing into memory_2."""
    basis = measurement_basis(basis)
    entries = np.zeros((2 * MEMORY_DIM**2, 2 * MEMORY_DIM**2), dtype=np.complex128)
    for index, level in enumerate((MemoryLevel.PLUS, MemoryLevel.MINUS)):
        eigenvector = basis.entries[:, index]
        projector = np.outer(eigenvector, eigenvector.conj())
        entries += np.kron(np.kron(projector, np.eye(MEMORY_DIM)), _record_permutation(level))
    return Operator(entries, (2, MEMORY_DIM, MEMORY_DIM), unitary=True)


def _checked_initial_state(psi0: StateVector) -> StateVector:
    if psi0.dims != (2,):
        raise DimensionMismatchError(f"Initial state must be a qubit, got dims {psi0.dims}")
    if psi0.norm == 0.0:
        raise InvalidStateError("Initial state has zero norm")
    return psi0.normalize()


def _check_boundaries(clock: ClockRegister, ka: int, kb: Optional[int] = None) -> None:
    if not 0 < ka < clock.n:
        raise LatticeIndexError(f"Measurement index ka={ka} must satisfy 0 < ka < {clock.n}")
    if kb is not None and not ka < kb < clock.n:
        raise LatticeIndexError(
            f"Measurement indices must satisfy 0 < ka < kb < n, got ka={ka}, kb={kb}, n={clock.n}"
        )


def _finish(block: np.ndarray, clock: ClockRegister) -> StateVector:
    return StateVector(block / np.sqrt(clock.n), block.shape)


def free_history(clock: ClockRegister, psi0: StateVector, omega: float) -> HistoryState:
    """Σ_k |t_k> U_{t_k}|ψ0> / √n."""
    psi0 = _checked_initial_state(psi0)
    block = evolution_stack(omega * clock.times) @ psi0.amplitudes
    logger.debug("free_history_built", n=clock.n, dt=clock.dt, omega=omega)
    return HistoryState(_finish(block, clock), clock, omega, psi0)


def single_measurement_history(
    clock: ClockRegister,
    psi0: StateVector,
    omega: float,
    ka: int,
    basis_a: Optional[Operator] = None,
) -> HistoryState:
    """History with one von Neumann record appearing at clock index ka.

    Raises:
        LatticeIndexError: If ka is not inside (0, n)
    """
    psi0 = _checked_initial_state(psi0)
    _check_boundaries(clock, ka)
    basis_a = measurement_basis(basis_a)
    times = clock.times
    t_a = times[ka]

    block = np.zeros((clock.n, 2, MEMORY_DIM), dtype=np.complex128)
    block[:ka, :, MemoryLevel.READY] = evolution_stack(omega * times[:ka]) @ psi0.amplitudes

    eigen = basis_a.entries
    amp_a = eigen.conj().T @ (evolution(omega * t_a).entries @ psi0.amplitudes)
    after = np.einsum("kij,ja->kia", evolution_stack(omega * (times[ka:] - t_a)), eigen)
    block[ka:, :, MemoryLevel.PLUS :] = after * amp_a

    logger.debug("single_measurement_history_built", n=clock.n, omega=omega, ka=ka)
    return HistoryState(_finish(block, clock), clock, omega, psi0, ka=ka, basis_a=basis_a)


def double_measurement_history(
    clock: ClockRegister,
    psi0: StateVector,
    omega: float,
    ka: int,
    kb: int,
    basis_a: Optional[Operator] = None,
    basis_b: Optional[Operator] = None,
) -> HistoryState:
    """Three-region history with records in memory_1 from ka and memory_2 from kb.

    Region 3 branches carry ⟨b|U_{t_b-t_a}|a⟩⟨a|ψ(t_a)⟩ U_{t_k-t_b}|b>|a>|b>.

    Raises:
        LatticeIndexError: If 0 < ka < kb < n does not hold
    """
    psi0 = _checked_initial_state(psi0)
    _check_boundaries(clock, ka, kb)
    basis_a = measurement_basis(basis_a)
    basis_b = measurement_basis(basis_b)
    times = clock.times
    t_a, t_b = times[ka], times[kb]
    eigen_a, eigen_b = basis_a.entries, basis_b.entries

    block = np.zeros((clock.n, 2, MEMORY_DIM, MEMORY_DIM), dtype=np.complex128)
    ready, records = MemoryLevel.READY, slice(MemoryLevel.PLUS, None)

    block[:ka, :, ready, ready] = evolution_stack(omega * times[:ka]) @ psi0.amplitudes

    amp_a = eigen_a.conj().T @ (evolution(omega * t_a).entries @ psi0.amplitudes)
    middle = np.einsum("kij,ja->kia", evolution_stack(omega * (times[ka:kb] - t_a)), eigen_a)
    block[ka:kb, :, records, ready] = middle * amp_a

    # coefficients[b, a] = <b|U_{t_b - t_a}|a><a|ψ(t_a)>
    transfer = eigen_b.conj().T @ evolution(omega * (t_b - t_a)).entries @ eigen_a
    coefficients = transfer * amp_a[np.newaxis, :]
    late = np.einsum("kij,jb->kib", evolution_stack(omega * (times[kb:] - t_b)), eigen_b)
    block[kb:, :, records, records] = np.einsum("kib,ba->kiab", late, coefficients)

    logger.debug("double_measurement_history_built", n=clock.n, omega=omega, ka=ka, kb=kb)
    return HistoryState(
        _finish(block, clock), clock, omega, psi0, ka=ka, kb=kb, basis_a=basis_a, basis_b=basis_b
    )


def _system_step(delta: float) -> Operator:
    """Free evolution on system ⊗ memory_1 ⊗ memory_2."""
    return kron(evolution(delta), identity((MEMORY_DIM, MEMORY_DIM)))


def global_propagator(
    clock: ClockRegister,
    omega: float,
    k: int,
    ka: int,
    kb: int,
    basis_a: Optional[Operator] = None,
    basis_b: Optional[Operator] = None,
) -> Operator:
    """Piecewise propagator U_G(t_k) on system ⊗ memory_1 ⊗ memory_2.

    The measurement times are parameters of U_G, applied once the clock
    reaches them: U_{t_k-t_b} V_b U_{t_b-t_a} V_a U_{t_a}.
    """
    times = clock.times
    t_k, t_a, t_b = times[k], times[ka], times[kb]
    if k < ka:
        return _system_step(omega * t_k)

    first_record = kron(record_unitary(basis_a), identity((MEMORY_DIM,)))
    propagator = compose(first_record, _system_step(omega * t_a))
    if k < kb:
        return compose(_system_step(omega * (t_k - t_a)), propagator)

    propagator = compose(_system_step(omega * (t_b - t_a)), propagator)
    propagator = compose(_second_record_unitary(basis_b), propagator)
    return compose(_system_step(omega * (t_k - t_b)), propagator)


def history_via_global_propagator(
    clock: ClockRegister,
    psi0: StateVector,
    omega: float,
    ka: int,
    kb: int,
    basis_a: Optional[Operator] = None,
    basis_b: Optional[Operator] = None,
) -> HistoryState:
    """Σ_k |t_k> U_G(t_k)|ψ0, r, r> / √n, built operator by operator."""
    psi0 = _checked_initial_state(psi0)
    _check_boundaries(clock, ka, kb)
    basis_a = measurement_basis(basis_a)
    basis_b = measurement_basis(basis_b)
    ready = basis_state((MEMORY_DIM,), MemoryLevel.READY)
    start = tensor(tensor(psi0, ready), ready)

    amplitudes = np.zeros(clock.n * start.amplitudes.size, dtype=np.complex128)
    for k in range(clock.n):
        propagator = global_propagator(clock, omega, k, ka, kb, basis_a, basis_b)
        term = tensor(basis_state((clock.n,), k), apply(propagator, start))
        amplitudes += term.amplitudes

    state = StateVector(amplitudes / np.sqrt(clock.n), (clock.n,) + start.dims)
    return HistoryState(state, clock, omega, psi0, ka=ka, kb=kb, basis_a=basis_a, basis_b=basis_b)


def translate_internal_time(history: HistoryState, shift: int) -> HistoryState:
    """Shift the internal time axis by ``shift`` lattice steps.

    Measurement indices move by ``shift`` and the initial state is pre-evolved
    by U_{-shift·dt}, so every record distribution is unchanged.

    Raises:
        LatticeIndexError: If a shifted boundary would wrap past the lattice ends
    """
    clock = history.clock
    ka = None if history.ka is None else history.ka + shift
    kb = None if history.kb is None else history.kb + shift
    if ka is not None and not 0 < ka < clock.n:
        raise LatticeIndexError(f"Shift {shift} moves ka outside (0, {clock.n})")
    if kb is not None and not kb < clock.n:
        raise LatticeIndexError(f"Shift {shift} moves kb to {kb}, beyond the lattice end")
    if shift == 0:
        return history

    psi0 = apply(evolution(-history.omega * shift * clock.dt), history.psi0)
    if ka is None:
        return free_history(clock, psi0, history.omega)
    if kb is None:
        return single_measurement_history(clock, psi0, history.omega, ka, history.basis_a)
    return double_measurement_history(
        clock, psi0, history.omega, ka, kb, history.basis_a, history.basis_b
    )


def condition_on_time(history: HistoryState, k: int) -> StateVector:
    """<t_k|Ψ>>, unnormalized, on system ⊗ memories.

    Raises:
        LatticeIndexError: If k is outside [0, n)
    """
    if not 0 <= k < history.clock.n:
        raise LatticeIndexError(f"Clock index {k} outside [0, {history.clock.n})")
    block = history.state.tensor_view()[k]
    return StateVector(block, history.state.dims[1:])


def clock_distribution(history: HistoryState) -> np.ndarray:
    """Born probability of each clock reading."""
    block = np.abs(history.state.tensor_view()) ** 2
    return block.reshape(history.clock.n, -1).sum(axis=1)


def global_hamiltonian(clock: ClockRegister, omega: float) -> Operator:
    """H_g = H_c ⊗ I + I ⊗ H_s on clock ⊗ system."""
    entries = (
        kron(clock_hamiltonian(clock), identity((2,))).entries
        + kron(identity((clock.n,)), system_hamiltonian(omega)).entries
    )
    return Operator(entries, (clock.n, 2), hermitian=True)


def _free_only(history: HistoryState) -> None:
    if history.measurement_count:
        raise MeasurementLayoutError(
            "Constraint checks apply to measurement-free histories; "
            "use the global-propagator equivalence for records"
        )


def constraint_residual(history: HistoryState, hamiltonian: Operator) -> float:
    """‖H_g Ψ‖ / ‖Ψ‖ for a measurement-free history.

    Raises:
        MeasurementLayoutError: If the history carries measurement records
        DimensionMismatchError: If H_g does not act on clock ⊗ system
    """
    _free_only(history)
    residual = apply(hamiltonian, history.state).norm / history.state.norm
    logger.debug("constraint_residual_computed", n=history.clock.n, residual=residual)
    return residual


def kernel_projection_residual(
    history: HistoryState, hamiltonian: Operator, tol: float = 1e-8
) -> float:
    """Distance from Ψ to its projection on the zero-eigenvalue eigenspace of dense H_g."""
    _free_only(history)
    if hamiltonian.dims != history.state.dims:
        raise DimensionMismatchError(
            f"H_g on {hamiltonian.dims} does not act on a history on {history.state.dims}"
        )
    eigenvalues, eigenvectors = scipy.linalg.eigh(hamiltonian.entries)
    kernel = eigenvectors[:, np.abs(eigenvalues) <= tol]
    psi = history.state.amplitudes
    projected = kernel @ (kernel.conj().T @ psi)
    residual = float(np.linalg.norm(psi - projected))
    logger.debug(
        "kernel_projection_checked", kernel_dimension=kernel.shape[1], residual=residual
    )
    return residual


def external_evolution(history: HistoryState, hamiltonian: Operator, tau: float) -> StateVector:
    """exp(-i H_g τ)|Ψ>>: the global state as seen by an external clock."""
    _free_only(history)
    return apply(expm(hamiltonian, -1j * tau), history.state)


def stationarity_drift(history: HistoryState, hamiltonian: Operator, tau: float) -> float:
    """Max-norm change of the global state under external evolution for time τ."""
    return max_norm_distance(external_evolution(history, hamiltonian, tau), history.state)
