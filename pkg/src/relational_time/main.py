"""Command-line entry point for the relational-time simulator."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, NoReturn, Optional, Sequence

import structlog
from pydantic import ValidationError

from . import __version__
from .cli.commands import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    cmd_constraint,
    cmd_correlations,
    cmd_lg,
    cmd_run_record,
)
from .cli.dependencies import resolve_config
from .cli.output import dataset_document, emit, render_csv, render_json
from .configuration.settings import RunConfig
from .models.domain_models import Dataset
from .utils.exceptions import ConfigurationError, NumericalInvariantError, RelationalTimeException

COMMANDS: dict[str, Callable[[RunConfig], Dataset]] = {
    "constraint": cmd_constraint,
    "correlations": cmd_correlations,
    "lg": cmd_lg,
}


def configure_logging(log_level: str = "WARNING", log_format: str = "json") -> None:
    """Configure structured logging on stderr.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_format: ``json`` or ``text``
    """
    logging.basicConfig(
        stream=sys.stderr,
        format="%(message)s",
        level=getattr(logging, log_level.upper(), logging.WARNING),
        force=True,
    )
    renderer = (
        structlog.dev.ConsoleRenderer(colors=False)
        if log_format == "text"
        else structlog.processors.JSONRenderer()
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        # reconfigured once the run config is known
        cache_logger_on_first_use=False,
    )


class _ArgumentParser(argparse.ArgumentParser):
    """Reports bad flags as configuration errors (exit 1) instead of argparse's exit 2."""

    def error(self, message: str) -> NoReturn:
        raise ConfigurationError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML or key=value config file")
    common.add_argument("--clock-n", dest="clock_n", type=int, help="Clock lattice size")
    common.add_argument("--dt", type=float, help="Clock lattice spacing")
    common.add_argument("--omega-index", dest="omega_index", type=int, help="Harmonic j")
    common.add_argument("--omega", type=float, help="Explicit angular frequency")
    common.add_argument(
        "--omega-mode",
        dest="omega_mode",
        choices=["thickness", "lattice"],
        help="Phase realization",
    )
    common.add_argument("--ka", type=int, help="Clock index of the first measurement")
    common.add_argument("--kb", type=int, help="Clock index of the second measurement")
    common.add_argument("--phases", help="Comma-separated phases, e.g. 0,pi/6,0.7")
    common.add_argument(
        "--reference-table",
        dest="reference_table",
        action="store_true",
        default=None,
        help="Emit the published K3 comparison",
    )
    common.add_argument("--shots", type=int, help="Shots per setting (0 = exact)")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--out", type=Path, help="Output file (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], help="Output format")
    common.add_argument("--workers", type=int, help="Threads for sweep points")
    common.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")

    parser = _ArgumentParser(
        prog="relational-time",
        description="Page-Wootters relational time simulator",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("constraint", parents=[common], help="Wheeler-DeWitt diagnostics")
    subparsers.add_parser("correlations", parents=[common], help="Two-time record statistics")
    subparsers.add_parser("lg", parents=[common], help="Leggett-Garg K3 sweep")
    subparsers.add_parser("run-record", parents=[common], help="Full JSON run record")
    return parser


def run(args: argparse.Namespace) -> int:
    """Resolve config, run one command and emit its output.

    Returns:
        Process exit code
    """
    config = resolve_config(args)
    configure_logging(config.logging.level, config.logging.format)
    logger = structlog.get_logger()
    logger.info("command_starting", command=args.command, shots=config.shots)

    if args.command == "run-record":
        document, exit_code = cmd_run_record(config)
        emit(render_json(document), config.out)
        return exit_code

    dataset = COMMANDS[args.command](config)
    if config.format == "csv":
        text = render_csv(dataset)
    else:
        text = render_json(dataset_document(dataset))
    emit(text, config.out)
    return dataset.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    logger = structlog.get_logger()
    try:
        args = build_parser().parse_args(argv)
        if args.log_level:
            configure_logging(args.log_level)
        exit_code = run(args)
    except NumericalInvariantError as e:
        logger.error("numerical_invariant_failed", error=str(e), error_type=type(e).__name__)
        return EXIT_NUMERICAL
    except (RelationalTimeException, ValidationError) as e:
        logger.error("configuration_error", error=str(e), error_type=type(e).__name__)
        return EXIT_CONFIG
    logger.info("command_finished", exit_code=exit_code)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
