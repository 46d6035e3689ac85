"""Dense complex linear algebra over labeled tensor-product spaces.

Factor ordering is row-major and fixed as [clock, system, memory_1, memory_2]
wherever those factors are present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from ..utils.exceptions import DimensionMismatchError, InvalidStateError, NumericalInvariantError

NORM_TOL = 1e-12
UNITARY_TOL = 1e-12
HERMITIAN_TOL = 1e-12


def _frozen(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=np.complex128, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector over a tensor-product Hilbert space."""

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        amplitudes = _frozen(np.ravel(self.amplitudes))
        if any(d < 1 for d in dims):
            raise DimensionMismatchError(f"Factor dimensions must be positive, got {dims}")
        if amplitudes.size != math.prod(dims):
            raise DimensionMismatchError(
                f"{amplitudes.size} amplitudes do not fit factor dimensions {dims}"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> StateVector:
        """Return the unit-norm copy of this vector.

        Raises:
            InvalidStateError: If the vector has zero norm
        """
        norm = self.norm
        if norm == 0.0:
            raise InvalidStateError("Cannot normalize a zero vector")
        return StateVector(self.amplitudes / norm, self.dims)

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor (read-only)."""
        return self.amplitudes.reshape(self.dims)


@dataclass(frozen=True)
class Operator:
    """Dense complex square matrix acting on a labeled space.

    ``unitary`` and ``hermitian`` are checked flags: construction fails if the
    matrix does not satisfy the flagged property within tolerance.
    """

    entries: np.ndarray
    dims: tuple[int, ...]
    unitary: bool = field(default=False)
    hermitian: bool = field(default=False)

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        entries = _frozen(self.entries)
        size = math.prod(dims)
        if entries.shape != (size, size):
            raise DimensionMismatchError(
                f"Operator of shape {entries.shape} does not act on factor dimensions {dims}"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "entries", entries)

        if self.unitary:
            error = unitarity_error(entries)
            if error > UNITARY_TOL:
                raise NumericalInvariantError(
                    f"Operator flagged unitary has |U†U - I| = {error:.3e}"
                )
        if self.hermitian:
            error = hermiticity_error(entries)
            if error > HERMITIAN_TOL:
                raise NumericalInvariantError(
                    f"Operator flagged hermitian has |A - A†| = {error:.3e}"
                )

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def unitarity_error(entries: np.ndarray) -> float:
    """Max-norm of U†U - I."""
    identity_ = np.eye(entries.shape[0])
    return float(np.max(np.abs(entries.conj().T @ entries - identity_), initial=0.0))


def hermiticity_error(entries: np.ndarray) -> float:
    """Max-norm of A - A†."""
    return float(np.max(np.abs(entries - entries.conj().T), initial=0.0))


ArrayLike = np.ndarray | StateVector | Operator


def max_norm_distance(a: ArrayLike, b: ArrayLike) -> float:
    """Largest absolute elementwise difference between two arrays of equal shape."""
    left = _raw(a)
    right = _raw(b)
    if left.shape != right.shape:
        raise DimensionMismatchError(f"Cannot compare shapes {left.shape} and {right.shape}")
    return float(np.max(np.abs(left - right), initial=0.0))


def _raw(value: ArrayLike) -> np.ndarray:
    if isinstance(value, StateVector):
        return value.amplitudes
    if isinstance(value, Operator):
        return value.entries
    return np.asarray(value)


def basis_state(dims: Sequence[int], index: int) -> StateVector:
    """Standard basis vector ``index`` on the space with factor dimensions ``dims``."""
    size = math.prod(dims)
    if not 0 <= index < size:
        raise DimensionMismatchError(f"Basis index {index} outside a space of size {size}")
    amplitudes = np.zeros(size, dtype=np.complex128)
    amplitudes[index] = 1.0
    return StateVector(amplitudes, tuple(dims))


def identity(dims: Sequence[int]) -> Operator:
    return Operator(np.eye(math.prod(dims)), tuple(dims), unitary=True, hermitian=True)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product of two states; factor dimensions are concatenated."""
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims)


def kron(a: Operator, b: Operator) -> Operator:
    """Kronecker product of two operators; unitary/hermitian flags are preserved."""
    return Operator(
        np.kron(a.entries, b.entries),
        a.dims + b.dims,
        unitary=a.unitary and b.unitary,
        hermitian=a.hermitian and b.hermitian,
    )


def compose(a: Operator, b: Operator) -> Operator:
    """Operator product ``a @ b`` (``b`` acts first)."""
    if a.dims != b.dims:
        raise DimensionMismatchError(f"Cannot compose operators on {a.dims} and {b.dims}")
    return Operator(a.entries @ b.entries, a.dims, unitary=a.unitary and b.unitary)


def apply(a: Operator, v: StateVector) -> StateVector:
    """Matrix-vector product.

    Raises:
        DimensionMismatchError: If operator and state live on different spaces
    """
    if a.dims != v.dims:
        raise DimensionMismatchError(f"Operator on {a.dims} cannot act on a state on {v.dims}")
    return StateVector(a.entries @ v.amplitudes, v.dims)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.dims != b.dims:
        raise DimensionMismatchError(f"Inner product between spaces {a.dims} and {b.dims}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def dft(n: int) -> Operator:
    """Unitary discrete Fourier transform with F[j, k] = exp(+2πi·jk/n)/√n.

    The sign convention puts the plane wave exp(+iωt) on the +ω momentum
    eigenvalue.

    Raises:
        DimensionMismatchError: If n < 1
    """
    if n < 1:
        raise DimensionMismatchError(f"DFT dimension must be >= 1, got {n}")
    # scipy uses exp(-2πi·jk/n); conjugate to get the position->momentum sign above
    entries = np.conj(scipy.linalg.dft(n, scale="sqrtn"))
    return Operator(entries, (n,), unitary=True)


def expm(a: Operator, scale: complex = 1.0) -> Operator:
    """Matrix exponential exp(scale · A)."""
    return Operator(scipy.linalg.expm(scale * a.entries), a.dims)
