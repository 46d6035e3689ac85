"""Experiment commands: constraint diagnostics, correlation curves, K3 sweeps, run records."""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Optional, Sequence, TypeVar, Union

import numpy as np
import structlog

from .. import __version__
from ..configuration.settings import RunConfig
from ..core.clock import commensurate_frequency, is_commensurate
from ..core.correlations import bayes_conditional, extract_joint, two_time_correlation
from ..core.history import (
    clock_distribution,
    constraint_residual,
    double_measurement_history,
    free_history,
    global_hamiltonian,
    kernel_projection_residual,
    stationarity_drift,
)
from ..core.leggett_garg import (
    k3_analytic,
    k3_sweep,
    realize_gap,
    reference_comparison,
)
from ..core.sampling import child_seed, draw_counts, estimated_joint
from ..core.system import initial_state
from ..models.domain_models import ClockRegister, Dataset, JointDistribution, LgPoint
from ..utils.exceptions import (
    CommensurabilityError,
    LatticeIndexError,
    RelationalTimeException,
)
from .dependencies import clock_from, lattice_omega, sampled_mode
from .output import (
    CORRELATION_RANGE,
    K3_RANGE,
    K3_SAMPLED_RANGE,
    PROBABILITY_RANGE,
    FullPrecision,
    check_columns,
    dataset_document,
)

logger = structlog.get_logger()

T = TypeVar("T")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

CONSTRAINT_TOL = 1e-8
ORACLE_TOL = 1e-10
DRIFT_TOL = 1e-9
UNIFORMITY_TOL = 1e-12
ORACLE_N = 8

CONSTRAINT_COLUMNS = ["check", "value", "tolerance", "passed"]
CORRELATION_COLUMNS = ["phase", "p_pp", "p_pm", "p_mp", "p_mm", "p_same_given", "p_diff_given", "C"]
LG_COLUMNS = ["x", "k3_analytic", "k3_simulated", "k3_hat", "k3_se", "violated"]
REFERENCE_COLUMNS = [
    "x",
    "k3_analytic",
    "k3_simulated",
    "paper_theory",
    "delta_vs_paper",
    "measured_k3",
    "measured_k3_se",
    "measured_sigma",
    "k3_hat",
    "k3_se",
    "violation_sigma",
]

# thickness-mode default grids: [0, π] for correlations, (0, π/2] for K3
DEFAULT_CORRELATION_STEPS = 24
DEFAULT_LG_STEPS = 24


def _map_points(
    evaluate: Callable[[tuple[int, float]], T], grid: Sequence[float], workers: int
) -> list[T]:
    """Evaluate grid points, on a thread pool when workers > 1, keeping grid order."""
    points = list(enumerate(grid))
    if workers <= 1:
        return [evaluate(point) for point in points]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(evaluate, points))


def _lattice_grid(config: RunConfig, clock: ClockRegister, gap_multiple: int) -> list[float]:
    """Every phase ω·g·dt whose measurements fit after ka."""
    step = lattice_omega(config) * clock.dt
    max_gap = (clock.n - 1 - config.ka) // gap_multiple
    return [gap * step for gap in range(1, max_gap + 1)]


def phase_grid(
    config: RunConfig, clock: ClockRegister, gap_multiple: int, span: float
) -> list[float]:
    """Configured phases, else every lattice phase (lattice mode) or an even grid over span."""
    if config.phases is not None:
        return list(config.phases)
    if config.omega_mode == "lattice":
        return _lattice_grid(config, clock, gap_multiple)
    if gap_multiple == 1:
        steps = DEFAULT_CORRELATION_STEPS
        return [span * k / steps for k in range(steps + 1)]
    # K3 needs three distinct times, so its grid starts one step above 0
    steps = DEFAULT_LG_STEPS
    return [span * k / steps for k in range(1, steps + 1)]


def cmd_constraint(config: RunConfig) -> Dataset:
    """Wheeler-DeWitt residual of the configured free history and the n = 8 kernel oracle."""
    clock = clock_from(config)
    omega = lattice_omega(config)
    commensurate = config.omega is None or is_commensurate(clock, omega)
    if not commensurate:
        logger.warning(
            "omega_incommensurate",
            omega=omega,
            n=clock.n,
            dt=clock.dt,
            detail="constraint holds only approximately; residual reported without a limit",
        )

    history = free_history(clock, initial_state(), omega)
    hamiltonian = global_hamiltonian(clock, omega)
    residual = constraint_residual(history, hamiltonian)
    drift = stationarity_drift(history, hamiltonian, 0.5 * clock.span)
    uniformity = float(np.max(np.abs(clock_distribution(history) - 1.0 / clock.n)))

    oracle_clock = ClockRegister(n=ORACLE_N, dt=config.dt)
    oracle_omega = commensurate_frequency(oracle_clock, min(config.omega_index, ORACLE_N // 2 - 1))
    oracle = kernel_projection_residual(
        free_history(oracle_clock, initial_state(), oracle_omega),
        global_hamiltonian(oracle_clock, oracle_omega),
    )

    def row(check: str, value: float, tolerance: float, enforced: bool = True) -> dict[str, Any]:
        return {
            "check": check,
            "value": FullPrecision(value),
            "tolerance": tolerance if enforced else None,
            "passed": value <= tolerance if enforced else None,
        }

    rows = [
        row("constraint_residual", residual, CONSTRAINT_TOL, commensurate),
        row("oracle_kernel_residual", oracle, ORACLE_TOL),
        row("stationarity_drift", drift, DRIFT_TOL, commensurate),
        row("clock_uniformity", uniformity, UNIFORMITY_TOL),
    ]
    failed = [r["check"] for r in rows if r["passed"] is False]
    exit_code = EXIT_NUMERICAL if failed else EXIT_OK
    if failed:
        logger.error("constraint_checks_failed", failed=failed, residual=residual)
    logger.info(
        "constraint_checked",
        omega=omega,
        commensurate=commensurate,
        residual=residual,
        oracle_residual=oracle,
        exit_code=exit_code,
    )
    return Dataset(name="constraint", columns=CONSTRAINT_COLUMNS, rows=rows, exit_code=exit_code)


def _conditional_means(joint: JointDistribution) -> tuple[Optional[float], Optional[float]]:
    """Mean over defined rows of p(b = a | a) and p(b ≠ a | a)."""
    conditional = bayes_conditional(joint)
    defined = [a for a, ok in enumerate(conditional.defined_mask) if ok]
    if not defined:
        return None, None
    same = math.fsum(conditional.value(a, a) or 0.0 for a in defined) / len(defined)
    diff = math.fsum(conditional.value(a, 1 - a) or 0.0 for a in defined) / len(defined)
    return same, diff


def correlation_row(phase: float, joint: JointDistribution) -> dict[str, Any]:
    p_same, p_diff = _conditional_means(joint)
    p_pp, p_pm, p_mp, p_mm = joint.cells()
    row = {
        "phase": phase,
        "p_pp": p_pp,
        "p_pm": p_pm,
        "p_mp": p_mp,
        "p_mm": p_mm,
        "p_same_given": p_same,
        "p_diff_given": p_diff,
        "C": two_time_correlation(joint),
    }
    check_columns(row, CORRELATION_COLUMNS[1:-1], PROBABILITY_RANGE)
    check_columns(row, ["C"], CORRELATION_RANGE)
    return row


def cmd_correlations(config: RunConfig) -> Dataset:
    """Joint, conditional and correlation values of two records over a phase grid."""
    clock = clock_from(config)
    mode = sampled_mode(config)
    grid = phase_grid(config, clock, 1, math.pi)
    psi0 = initial_state()

    def evaluate(indexed: tuple[int, float]) -> Optional[dict[str, Any]]:
        index, phase = indexed
        try:
            if config.omega_mode == "lattice":
                omega = lattice_omega(config)
                gap = realize_gap(clock, omega, phase)
            else:
                gap = config.gap
                omega = phase / (gap * clock.dt)
            joint = extract_joint(
                double_measurement_history(clock, psi0, omega, config.ka, config.ka + gap)
            )
        except (CommensurabilityError, LatticeIndexError) as e:
            logger.warning(
                "correlation_row_failed", phase=phase, error=str(e), error_type=type(e).__name__
            )
            return None
        if mode is not None:
            record = draw_counts(joint, mode.shots, child_seed(mode.seed, index))
            joint = estimated_joint(record)
        return correlation_row(phase, joint)

    results = _map_points(evaluate, grid, config.workers)
    rows = [row if row is not None else {"phase": phase} for phase, row in zip(grid, results)]
    failures = sum(row is None for row in results)
    logger.info(
        "correlations_computed", rows=len(rows), failures=failures, sampled=mode is not None
    )
    return Dataset(
        name="correlations",
        columns=CORRELATION_COLUMNS,
        rows=rows,
        exit_code=EXIT_CONFIG if failures else EXIT_OK,
    )


def _sweep(
    config: RunConfig, clock: ClockRegister, grid: Sequence[float], sampled: bool
) -> list[Union[LgPoint, RelationalTimeException]]:
    mode = sampled_mode(config) if sampled else None
    if config.omega_mode == "lattice":
        return k3_sweep(
            clock,
            grid,
            mode,
            omega=lattice_omega(config),
            ka=config.ka,
            workers=config.workers,
            return_exceptions=True,
        )
    return k3_sweep(
        clock,
        grid,
        mode,
        gap=config.gap,
        ka=config.ka,
        workers=config.workers,
        return_exceptions=True,
    )


def lg_dataset(config: RunConfig) -> Dataset:
    """K3 curve: closed form, exact history simulation and, with shots, the sampled estimate."""
    clock = clock_from(config)
    grid = phase_grid(config, clock, 2, math.pi / 2)
    exact = _sweep(config, clock, grid, sampled=False)
    sampled = _sweep(config, clock, grid, sampled=True) if config.shots else [None] * len(grid)

    rows: list[dict[str, Any]] = []
    failures = 0
    for x, point, estimate in zip(grid, exact, sampled):
        failed_sample = estimate is not None and not isinstance(estimate, LgPoint)
        if not isinstance(point, LgPoint) or failed_sample:
            failures += 1
            rows.append({"x": x})
            continue
        row = {
            "x": x,
            "k3_analytic": k3_analytic(x),
            "k3_simulated": point.k3,
            "k3_hat": estimate.k3 if estimate else None,
            "k3_se": estimate.k3_se if estimate else None,
            "violated": estimate.violated if estimate else point.violated,
        }
        check_columns(row, ["k3_analytic", "k3_simulated"], K3_RANGE)
        check_columns(row, ["k3_hat"], K3_SAMPLED_RANGE)
        rows.append(row)

    logger.info("lg_sweep_computed", rows=len(rows), failures=failures, shots=config.shots)
    return Dataset(
        name="lg", columns=LG_COLUMNS, rows=rows, exit_code=EXIT_CONFIG if failures else EXIT_OK
    )


def reference_dataset(config: RunConfig) -> Dataset:
    """Published K3 comparison, realized at the configured gap (kb - ka)."""
    rows = reference_comparison(clock_from(config), config.gap, config.ka, sampled_mode(config))
    for row in rows:
        check_columns(row, ["k3_analytic", "k3_simulated"], K3_RANGE)
        check_columns(row, ["k3_hat"], K3_SAMPLED_RANGE)
    return Dataset(name="reference_table", columns=REFERENCE_COLUMNS, rows=rows)


def require_lg_layout(config: RunConfig) -> None:
    """Reject a K3 layout past the lattice end before any history is built."""
    if config.omega_mode == "thickness" or config.reference_table:
        config.check_lg_layout()


def cmd_lg(config: RunConfig) -> Dataset:
    """K3 sweep, or the published comparison when ``reference_table`` is set."""
    require_lg_layout(config)
    if config.reference_table:
        return reference_dataset(config)
    return lg_dataset(config)


def cmd_run_record(config: RunConfig) -> tuple[dict[str, Any], int]:
    """All datasets with the echoed config, library version, seed and duration.

    Returns:
        The JSON document and the worst exit code among its datasets
    """
    require_lg_layout(config)
    started = time.perf_counter()
    datasets = [cmd_constraint(config), cmd_correlations(config), lg_dataset(config)]
    if config.reference_table:
        datasets.append(reference_dataset(config))

    document: dict[str, Any] = {
        "config": config.model_dump(mode="json"),
        "version": __version__,
        "seed": config.seed,
        "results": {dataset.name: dataset_document(dataset) for dataset in datasets},
    }
    if config.shots > 0:
        document["sampling"] = {
            "shots": config.shots,
            "prng": "numpy.random.Philox",
            "seed_derivation": "numpy.random.SeedSequence(seed, spawn_key=(point, ...))",
        }
    document["duration_s"] = time.perf_counter() - started

    exit_code = max(dataset.exit_code for dataset in datasets)
    logger.info(
        "run_record_built",
        datasets=[dataset.name for dataset in datasets],
        duration_s=document["duration_s"],
        exit_code=exit_code,
    )
    return document, exit_code
