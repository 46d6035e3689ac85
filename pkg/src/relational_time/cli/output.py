"""Number formatting, output assertions and CSV/JSON emission."""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Optional

import structlog

from ..models.domain_models import Dataset
from ..utils.exceptions import ConfigurationError, NumericalInvariantError

logger = structlog.get_logger()

# values are rounded to this many decimal places before printing
DECIMAL_PLACES = 12
ASSERTION_SLACK = 1e-12

PROBABILITY_RANGE = (0.0, 1.0)
CORRELATION_RANGE = (-1.0, 1.0)
K3_RANGE = (-3.0, 1.5)
K3_SAMPLED_RANGE = (-3.0, 3.0)


class FullPrecision(float):
    """A float printed without the fixed-place rounding, for residuals far below 1e-12."""


def normalize_number(value: float) -> float | int:
    """Round to DECIMAL_PLACES unless FullPrecision; integral values and -0.0 become ints."""
    if not math.isfinite(value):
        raise NumericalInvariantError(f"Non-finite value {value} in output")
    if isinstance(value, FullPrecision):
        rounded = float(value)
    else:
        rounded = round(float(value), DECIMAL_PLACES)
    if rounded.is_integer():
        return int(rounded)
    return rounded


def format_cell(value: Any) -> str:
    """Shortest round-trip text for a cell; ``None`` is an empty cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(normalize_number(value))
    return str(value)


def check_range(name: str, value: Optional[float], bounds: tuple[float, float]) -> None:
    """Raise NumericalInvariantError when ``value`` leaves ``bounds`` by more than the slack."""
    if value is None:
        return
    low, high = bounds
    if not low - ASSERTION_SLACK <= value <= high + ASSERTION_SLACK:
        raise NumericalInvariantError(f"{name}={value} outside [{low}, {high}]")


def check_columns(row: dict[str, Any], columns: Iterable[str], bounds: tuple[float, float]) -> None:
    for column in columns:
        check_range(column, row.get(column), bounds)


def _jsonable(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return normalize_number(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


def render_csv(dataset: Dataset) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(dataset.columns)
    for row in dataset.rows:
        writer.writerow([format_cell(row.get(column)) for column in dataset.columns])
    return buffer.getvalue()


def render_json(document: Any) -> str:
    """Sorted-key JSON with fixed number formatting."""
    return json.dumps(_jsonable(document), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def dataset_document(dataset: Dataset) -> dict[str, Any]:
    return {
        "columns": dataset.columns,
        "rows": [{column: row.get(column) for column in dataset.columns} for row in dataset.rows],
    }


def emit(text: str, out: Optional[Path]) -> None:
    """Write ``text`` to ``out``, or to stdout when no path is given.

    Raises:
        ConfigurationError: If the output path cannot be written
    """
    if out is None:
        print(text, end="")
        return
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot write output to {out}: {e}") from e
    logger.info("output_written", path=str(out), bytes=len(text.encode("utf-8")))
