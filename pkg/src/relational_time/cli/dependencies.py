"""Shared command inputs resolved from parsed flags."""

import argparse
from typing import Any

import structlog

from ..configuration.settings import RunConfig, load_config_file
from ..core.clock import commensurate_frequency
from ..models.domain_models import ClockRegister, SampledMode

logger = structlog.get_logger()

# argparse dest -> RunConfig field
FLAG_FIELDS = (
    "clock_n",
    "dt",
    "omega_index",
    "omega",
    "omega_mode",
    "ka",
    "kb",
    "phases",
    "reference_table",
    "shots",
    "seed",
    "out",
    "format",
    "workers",
)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge the optional config file with command-line flags.

    Args:
        args: Parsed command-line arguments

    Returns:
        Validated run configuration

    Raises:
        ConfigurationError: If the file cannot be read or a value is invalid
    """
    file_values: dict[str, Any] = {}
    if getattr(args, "config", None) is not None:
        file_values = load_config_file(args.config)
        logger.info("config_file_loaded", path=str(args.config), keys=sorted(file_values))

    overrides = {field: getattr(args, field, None) for field in FLAG_FIELDS}
    if getattr(args, "log_level", None):
        overrides["logging"] = {**file_values.get("logging", {}), "level": args.log_level}

    config = RunConfig.build(file_values, overrides)
    logger.debug("config_resolved", config=config.model_dump(mode="json"))
    return config


def clock_from(config: RunConfig) -> ClockRegister:
    return ClockRegister(n=config.clock_n, dt=config.dt)


def lattice_omega(config: RunConfig) -> float:
    """The explicit ω override, else the commensurate frequency of harmonic j."""
    if config.omega is not None:
        return config.omega
    return commensurate_frequency(clock_from(config), config.omega_index)


def sampled_mode(config: RunConfig) -> SampledMode | None:
    """Finite-shot settings, or None for exact probabilities (shots = 0)."""
    if config.shots == 0:
        return None
    return SampledMode(shots=config.shots, seed=config.seed)
