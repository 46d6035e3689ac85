"""Two-time record statistics extracted from history states."""

from typing import Optional

import numpy as np
import structlog

from ..models.domain_models import OUTCOME_VALUES, ConditionalTable, JointDistribution
from ..utils.exceptions import LatticeIndexError, MeasurementLayoutError
from .history import HistoryState, MemoryLevel, condition_on_time
from .kernel import Operator
from .system import evolution, measurement_basis

logger = structlog.get_logger()

# p(a) at or below this is treated as an impossible first outcome
CONDITIONING_FLOOR = 1e-15

_OUTCOMES = np.array(OUTCOME_VALUES, dtype=float)


def record_distribution(history: HistoryState, k: int) -> np.ndarray:
    """Probabilities of the memory levels at clock index k, given the clock shows t_k.

    Returns an array with one axis per memory factor (length 3 each, ordered
    r, +1, -1).
    """
    conditioned = condition_on_time(history, k).normalize()
    weights = np.abs(conditioned.tensor_view()) ** 2
    return weights.sum(axis=0)


def extract_joint(history: HistoryState) -> JointDistribution:
    """Joint record distribution p(a, b) read after the second measurement.

    Raises:
        MeasurementLayoutError: If the history does not carry two measurements
        LatticeIndexError: If no clock index lies after the second measurement
    """
    if history.ka is None or history.kb is None:
        raise MeasurementLayoutError("Joint extraction needs a double-measurement history")
    if history.kb >= history.clock.n:
        raise LatticeIndexError("No clock index after the second measurement")

    levels = record_distribution(history, history.kb)
    joint = levels[MemoryLevel.PLUS :, MemoryLevel.PLUS :]
    result = JointDistribution(p=joint.tolist(), phase=history.gap_phase)
    logger.debug("joint_extracted", phase=result.phase, p=result.p)
    return result


def extract_marginal(history: HistoryState) -> np.ndarray:
    """p(a) read from the first memory between the two measurements."""
    if history.ka is None:
        raise MeasurementLayoutError("Marginal extraction needs at least one measurement")
    levels = record_distribution(history, history.ka)
    if levels.ndim == 2:
        levels = levels[:, MemoryLevel.READY]
    return levels[MemoryLevel.PLUS :]


def bayes_conditional(joint: JointDistribution) -> ConditionalTable:
    """p(b|a) = p(a, b) / p(a); rows with p(a) = 0 are flagged, not filled."""
    rows: list[Optional[list[float]]] = []
    for row in joint.matrix:
        marginal = row.sum()
        rows.append(None if marginal <= CONDITIONING_FLOOR else (row / marginal).tolist())
    return ConditionalTable(p=rows, defined_mask=[row is not None for row in rows])


def analytic_joint(phase: float) -> JointDistribution:
    """½cos² on agreeing records, ½sin² on disagreeing ones."""
    same = np.cos(phase) ** 2 / 2
    diff = np.sin(phase) ** 2 / 2
    return JointDistribution(p=[[same, diff], [diff, same]], phase=phase)


def two_time_correlation(joint: JointDistribution) -> float:
    """C = Σ Q_a Q_b p(a, b)."""
    return float(_OUTCOMES @ joint.matrix @ _OUTCOMES)


def transition_probabilities(
    phase: float,
    basis_a: Optional[Operator] = None,
    basis_b: Optional[Operator] = None,
) -> np.ndarray:
    """|<b|U_phase|a>|² indexed [a, b]."""
    eigen_a = measurement_basis(basis_a).entries
    eigen_b = measurement_basis(basis_b).entries
    transfer = eigen_b.conj().T @ evolution(phase).entries @ eigen_a
    return np.abs(transfer.T) ** 2
