"""Finite-shot emulation of photon counting over the four record cells.

Draws use numpy's counter-based ``Philox`` bit generator behind
``numpy.random.Generator``. Each shot takes one ``Generator.random`` double u
and lands in the first cell whose cumulative probability exceeds u, scanning
cells in the fixed order (+,+), (+,-), (-,+), (-,-).
"""

import math
from typing import NamedTuple, Sequence

import numpy as np
import structlog

from ..models.domain_models import CountRecord, JointDistribution
from ..utils.exceptions import ConfigurationError

logger = structlog.get_logger()

CELL_COUNT = 4


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def child_seed(master_seed: int, *index: int) -> int:
    """Seed for task ``index`` derived only from (master seed, index)."""
    sequence = np.random.SeedSequence(master_seed, spawn_key=tuple(index))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def draw_counts(joint: JointDistribution, shots: int, seed: int) -> CountRecord:
    """One multinomial draw of ``shots`` records from ``joint``.

    Raises:
        ConfigurationError: If shots < 1
    """
    if shots < 1:
        raise ConfigurationError(f"shots must be >= 1, got {shots}")
    cumulative = np.cumsum(joint.cells())
    cumulative[-1] = 1.0
    uniforms = make_generator(seed).random(shots)
    cells = np.minimum(np.searchsorted(cumulative, uniforms, side="right"), CELL_COUNT - 1)
    counts = np.bincount(cells, minlength=CELL_COUNT).reshape(2, 2)
    record = CountRecord(counts=counts.tolist(), shots=shots, seed=seed)
    logger.debug("counts_drawn", shots=shots, seed=seed, counts=record.counts)
    return record


def estimated_joint(record: CountRecord) -> JointDistribution:
    return JointDistribution(p=record.estimates)


def estimate_correlation(record: CountRecord) -> tuple[float, float]:
    """Estimated C = 2·p̂_same - 1 and its standard error 2·√(p̂_same(1-p̂_same)/shots)."""
    # integer numerator keeps same within [0, 1]
    same = (record.counts[0][0] + record.counts[1][1]) / record.shots
    return 2.0 * same - 1.0, 2.0 * math.sqrt(same * (1.0 - same) / record.shots)


class K3Estimate(NamedTuple):
    k3_hat: float
    k3_se: float

    @property
    def violation_sigma(self) -> float | None:
        """Distance above the classical bound in standard errors."""
        if self.k3_se == 0.0:
            return None
        return (self.k3_hat - 1.0) / self.k3_se


def estimate_k3(records: Sequence[CountRecord]) -> K3Estimate:
    """K3 from three independent runs ordered (C12, C23, C13).

    Raises:
        ConfigurationError: If not exactly three records are given
    """
    if len(records) != 3:
        raise ConfigurationError(f"K3 needs three count records, got {len(records)}")
    (c12, se12), (c23, se23), (c13, se13) = (estimate_correlation(r) for r in records)
    return K3Estimate(c12 + c23 - c13, math.sqrt(se12**2 + se23**2 + se13**2))
