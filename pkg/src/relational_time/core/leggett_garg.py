"""Leggett-Garg K3 from three two-time correlations.

Times follow t2 - t1 = t3 - t2 = Δt with t1 at the first measurement index.
C(t1,t2) and C(t1,t3) come from double-measurement histories at gap phases x
and 2x. C(t2,t3) is measured noninvasively at t2: the initial state is
pre-evolved by U_x before the first record, and the gap phase is x again.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
import structlog

from ..models.domain_models import (
    ClockRegister,
    CountRecord,
    JointDistribution,
    LgPoint,
    SampledMode,
)
from ..utils.exceptions import (
    CommensurabilityError,
    ConfigurationError,
    LatticeIndexError,
    NumericalInvariantError,
    RelationalTimeException,
)
from .correlations import extract_joint, two_time_correlation
from .history import double_measurement_history
from .kernel import StateVector, apply
from .sampling import K3Estimate, child_seed, draw_counts, estimate_correlation, estimate_k3
from .system import evolution, initial_state

logger = structlog.get_logger()

CLASSICAL_BOUND = 1.0
VIOLATION_TOL = 1e-9
PHASE_TOL = 1e-9
CORRELATION_SLACK = 1e-12


class ReferenceRow(NamedTuple):
    """Published K3 values at one phase ωΔt."""

    x: float
    theory: float
    experiment: float
    experiment_se: float
    quoted_sigma: float


REFERENCE_TABLE: tuple[ReferenceRow, ...] = (
    ReferenceRow(0.2, 1.159, 1.138, 0.004, 35.0),
    ReferenceRow(0.5, 1.499, 1.538, 0.018, 30.0),
    ReferenceRow(0.7, 1.282, 1.238, 0.018, 20.0),
)


def k3_combine(c12: float, c23: float, c13: float) -> float:
    """K3 = C(t1,t2) + C(t2,t3) - C(t1,t3).

    Raises:
        NumericalInvariantError: If a correlation lies outside [-1, 1]
    """
    for name, value in (("c12", c12), ("c23", c23), ("c13", c13)):
        if abs(value) > 1.0 + CORRELATION_SLACK:
            raise NumericalInvariantError(f"Correlation {name}={value} outside [-1, 1]")
    return c12 + c23 - c13


def k3_analytic(x: float) -> float:
    """2cos²x - 2sin²x - cos²2x + sin²2x = 2cos 2x - cos 4x."""
    return float(2.0 * np.cos(2.0 * x) - np.cos(4.0 * x))


def realize_gap(clock: ClockRegister, omega: float, x: float) -> int:
    """Index gap g with ω·g·dt = x.

    Raises:
        CommensurabilityError: If x is not an integer number of lattice steps
            of phase ω·dt, or the gap would be zero
    """
    step = omega * clock.dt
    if step == 0.0:
        raise CommensurabilityError("ω = 0 realizes no nonzero phase", nearest_phase=0.0)
    ratio = x / step
    gap = round(ratio)
    if abs(ratio - gap) > PHASE_TOL * max(1.0, abs(ratio)):
        nearest = max(gap, 1) * step
        raise CommensurabilityError(
            f"Phase {x} is not a lattice phase for ω·dt = {step}; nearest realizable {nearest}",
            nearest_phase=nearest,
        )
    if gap < 1:
        raise CommensurabilityError(
            f"Phase {x} needs a gap of {gap} steps; measurement gaps must be >= 1",
            nearest_phase=step,
        )
    return gap


def lg_joints(
    clock: ClockRegister,
    omega: float,
    x: float,
    ka: int = 1,
    gap: Optional[int] = None,
    psi0: Optional[StateVector] = None,
) -> tuple[JointDistribution, JointDistribution, JointDistribution]:
    """Joint record distributions for (C12, C23, C13) at phase x.

    Raises:
        CommensurabilityError: If x is 0 or not realizable
        LatticeIndexError: If the doubled gap runs past the lattice end
    """
    if x == 0.0 or omega == 0.0:
        raise CommensurabilityError(
            f"Phase {x} at ω = {omega} collapses t1, t2, t3 onto one time; K3 needs x != 0",
            nearest_phase=abs(omega) * clock.dt if omega else None,
        )
    if gap is None:
        gap = realize_gap(clock, omega, x)
    elif gap < 1 or abs(omega * gap * clock.dt - x) > PHASE_TOL * max(1.0, abs(x)):
        raise CommensurabilityError(
            f"Gap {gap} at ω = {omega} realizes phase {omega * gap * clock.dt}, not {x}",
            nearest_phase=omega * gap * clock.dt,
        )
    if ka + 2 * gap >= clock.n:
        raise LatticeIndexError(
            f"ka + 2·gap = {ka + 2 * gap} must stay below n = {clock.n} for C(t1, t3)"
        )

    psi0 = initial_state() if psi0 is None else psi0
    t_a = ka * clock.dt
    # first record sees ψ(0) exactly
    start = apply(evolution(-omega * t_a), psi0)
    # extra plate of thickness x ahead of the first record
    shifted = apply(evolution(x - omega * t_a), psi0)

    c12 = extract_joint(double_measurement_history(clock, start, omega, ka, ka + gap))
    c23 = extract_joint(double_measurement_history(clock, shifted, omega, ka, ka + gap))
    c13 = extract_joint(double_measurement_history(clock, start, omega, ka, ka + 2 * gap))
    return c12, c23, c13


def sample_lg_records(
    joints: Sequence[JointDistribution], mode: SampledMode, point_index: int = 0
) -> list[CountRecord]:
    """Independent count records per correlation, seeded from (master seed, point, slot)."""
    return [
        draw_counts(joint, mode.shots, child_seed(mode.seed, point_index, slot))
        for slot, joint in enumerate(joints)
    ]


def k3_simulated(
    clock: ClockRegister,
    omega: float,
    x: float,
    mode: Optional[SampledMode] = None,
    ka: int = 1,
    gap: Optional[int] = None,
    point_index: int = 0,
    psi0: Optional[StateVector] = None,
) -> LgPoint:
    """K3 at phase x from history states, exact or finite-shot.

    Args:
        clock: Clock register
        omega: System angular frequency
        x: Phase ωΔt
        mode: None for Born-rule probabilities, else finite-shot settings
        ka: Clock index of t1
        gap: Index gap Δt/dt; derived from ω and x when omitted
        point_index: Sweep position, used for seed derivation
        psi0: Initial state, (|H> + |V>)/√2 by default

    Returns:
        LgPoint with the three correlations and K3
    """
    joints = lg_joints(clock, omega, x, ka, gap, psi0)

    if mode is None:
        c12, c23, c13 = (two_time_correlation(joint) for joint in joints)
        k3 = k3_combine(c12, c23, c13)
        return LgPoint(
            x=x, c12=c12, c23=c23, c13=c13, k3=k3, violated=k3 > CLASSICAL_BOUND + VIOLATION_TOL
        )

    records = sample_lg_records(joints, mode, point_index)
    (c12, _), (c23, _), (c13, _) = (estimate_correlation(record) for record in records)
    estimate = estimate_k3(records)
    return LgPoint(
        x=x,
        c12=c12,
        c23=c23,
        c13=c13,
        k3=estimate.k3_hat,
        k3_se=estimate.k3_se,
        violated=estimate.k3_hat > CLASSICAL_BOUND,
    )


def k3_sweep(
    clock: ClockRegister,
    x_grid: Sequence[float],
    mode: Optional[SampledMode] = None,
    *,
    omega: Optional[float] = None,
    gap: Optional[int] = None,
    ka: int = 1,
    workers: int = 1,
    return_exceptions: bool = False,
) -> list[Union[LgPoint, RelationalTimeException]]:
    """K3 over a phase grid, in grid order.

    Exactly one of ``omega`` (fixed frequency, gap derived per phase) or
    ``gap`` (fixed geometry, ω = x/(gap·dt) per phase) must be given. Points
    are independent; ``workers`` > 1 evaluates them on a thread pool with
    identical results. With ``return_exceptions`` a point that cannot be
    realized yields its CommensurabilityError or LatticeIndexError in place.
    """
    if (omega is None) == (gap is None):
        raise ConfigurationError("Give exactly one of omega or gap")

    def evaluate(indexed: tuple[int, float]) -> Union[LgPoint, RelationalTimeException]:
        index, x = indexed
        try:
            if gap is not None:
                return k3_simulated(clock, x / (gap * clock.dt), x, mode, ka, gap, index)
            assert omega is not None
            return k3_simulated(clock, omega, x, mode, ka, None, index)
        except (CommensurabilityError, LatticeIndexError) as e:
            if not return_exceptions:
                raise
            logger.warning("sweep_point_failed", x=x, error=str(e), error_type=type(e).__name__)
            return e

    points = list(enumerate(x_grid))
    if workers <= 1:
        results = [evaluate(point) for point in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(evaluate, points))

    logger.info("k3_sweep_completed", points=len(results), workers=workers)
    return results


def reference_comparison(
    clock: ClockRegister,
    gap: int,
    ka: int = 1,
    mode: Optional[SampledMode] = None,
) -> list[dict[str, Optional[float]]]:
    """Published K3 values next to the closed form and the simulation."""
    rows: list[dict[str, Optional[float]]] = []
    for index, reference in enumerate(REFERENCE_TABLE):
        formula = k3_analytic(reference.x)
        omega = reference.x / (gap * clock.dt)
        simulated = k3_simulated(clock, omega, reference.x, None, ka, gap, index)
        row: dict[str, Optional[float]] = {
            "x": reference.x,
            "k3_analytic": formula,
            "k3_simulated": simulated.k3,
            "paper_theory": reference.theory,
            "delta_vs_paper": abs(formula - reference.theory),
            "measured_k3": reference.experiment,
            "measured_k3_se": reference.experiment_se,
            "measured_sigma": reference.quoted_sigma,
            "k3_hat": None,
            "k3_se": None,
            "violation_sigma": None,
        }
        if mode is not None:
            sampled = k3_simulated(clock, omega, reference.x, mode, ka, gap, index)
            row["k3_hat"] = sampled.k3
            row["k3_se"] = sampled.k3_se
            if sampled.k3_se is not None:
                row["violation_sigma"] = K3Estimate(sampled.k3, sampled.k3_se).violation_sigma
        rows.append(row)
    logger.debug("reference_comparison_built", rows=len(rows), gap=gap)
    return rows
