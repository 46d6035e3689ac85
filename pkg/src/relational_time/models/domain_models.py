"""Domain models for clock lattices, record statistics and Leggett-Garg points."""

from __future__ import annotations

import math
from typing import Any, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)

# Outcome labels Q for record index 0 (|H>) and 1 (|V>)
OUTCOME_VALUES: tuple[int, int] = (1, -1)

PROBABILITY_SUM_TOL = 1e-9


def _check_square_two(table: list[list[float]], name: str) -> None:
    if len(table) != 2 or any(len(row) != 2 for row in table):
        raise ValueError(f"{name} must be a 2x2 table")


class ClockRegister(BaseModel):
    """Periodic n-point time lattice with spacing dt."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=4, description="Number of lattice points (even)")
    dt: float = Field(..., gt=0, description="Lattice spacing in time units")
    hbar: float = Field(1.0, description="Reduced Planck constant (fixed to 1)")

    @field_validator("n")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"n must be even, got {value}")
        return value

    @field_validator("hbar")
    @classmethod
    def _unit_hbar(cls, value: float) -> float:
        if value != 1.0:
            raise ValueError("hbar is fixed to 1")
        return value

    @property
    def times(self) -> np.ndarray:
        """Lattice times t_k = k·dt."""
        return np.arange(self.n) * self.dt

    @property
    def span(self) -> float:
        return self.n * self.dt

    @property
    def frequencies(self) -> np.ndarray:
        """Centered momentum eigenvalues 2π·m̃/(n·dt), in DFT column order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dt)


class JointDistribution(BaseModel):
    """Joint record probabilities p(a, b) over outcomes (+1, -1)²."""

    model_config = ConfigDict(frozen=True)

    p: list[list[float]] = Field(..., description="p[a][b], index 0 is Q=+1, index 1 is Q=-1")
    phase: Optional[float] = Field(None, description="Dimensionless phase ω(t_b - t_a)")

    @field_validator("p")
    @classmethod
    def _valid_table(cls, value: list[list[float]]) -> list[list[float]]:
        _check_square_two(value, "p")
        if any(cell < -PROBABILITY_SUM_TOL for row in value for cell in row):
            raise ValueError("probabilities must be nonnegative")
        total = math.fsum(cell for row in value for cell in row)
        if abs(total - 1.0) > PROBABILITY_SUM_TOL:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        return [[max(float(cell), 0.0) for cell in row] for row in value]

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.p, dtype=float)

    def marginal_a(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def cells(self) -> tuple[float, float, float, float]:
        """Cells in the fixed (+,+), (+,-), (-,+), (-,-) order."""
        return (self.p[0][0], self.p[0][1], self.p[1][0], self.p[1][1])


class ConditionalTable(BaseModel):
    """Bayes conditionals p(b|a); rows with p(a) = 0 are flagged undefined."""

    model_config = ConfigDict(frozen=True)

    p: list[Optional[list[float]]] = Field(..., description="p[a][b] = p(b|a), None if undefined")
    defined_mask: list[bool] = Field(..., description="True where p(a) > 0")

    @model_validator(mode="after")
    def _rows_consistent(self) -> ConditionalTable:
        if len(self.p) != 2 or len(self.defined_mask) != 2:
            raise ValueError("conditional table needs exactly two rows")
        for row, defined in zip(self.p, self.defined_mask):
            if defined != (row is not None):
                raise ValueError("defined_mask disagrees with row contents")
            if row is not None and abs(math.fsum(row) - 1.0) > 1e-10:
                raise ValueError(f"conditional row {row} does not sum to 1")
        return self

    def value(self, a: int, b: int) -> Optional[float]:
        row = self.p[a]
        return None if row is None else row[b]


class CountRecord(BaseModel):
    """Finite-shot counts over the four record cells."""

    model_config = ConfigDict(frozen=True)

    counts: list[list[int]] = Field(..., description="counts[a][b]")
    shots: int = Field(..., ge=1, description="Total draws")
    seed: int = Field(..., ge=0, description="Generator seed")

    @model_validator(mode="after")
    def _counts_total(self) -> CountRecord:
        _check_square_two(self.counts, "counts")
        if sum(sum(row) for row in self.counts) != self.shots:
            raise ValueError("counts do not add up to shots")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def estimates(self) -> list[list[float]]:
        return [[count / self.shots for count in row] for row in self.counts]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def std_err(self) -> list[list[float]]:
        return [[math.sqrt(p * (1.0 - p) / self.shots) for p in row] for row in self.estimates]


class LgPoint(BaseModel):
    """One point of the Leggett-Garg K3 curve."""

    model_config = ConfigDict(frozen=True)

    x: float = Field(..., description="Dimensionless phase ωΔt")
    c12: float = Field(..., description="C(t1, t2)")
    c23: float = Field(..., description="C(t2, t3)")
    c13: float = Field(..., description="C(t1, t3)")
    k3: float = Field(..., description="c12 + c23 - c13")
    violated: bool = Field(..., description="k3 above the classical bound 1")
    k3_se: Optional[float] = Field(None, description="Standard error of k3 (sampled mode)")


class SampledMode(BaseModel):
    """Finite-shot detection settings; absent means exact Born-rule probabilities."""

    model_config = ConfigDict(frozen=True)

    shots: int = Field(..., ge=1, description="Draws per correlation setting")
    seed: int = Field(..., ge=0, description="Master seed for per-point child seeds")


class Dataset(BaseModel):
    """Tabular command result; ``None`` cells are emitted empty."""

    name: str = Field(..., description="Dataset key in the run record")
    columns: list[str] = Field(..., description="Normative column order")
    rows: list[dict[str, Any]] = Field(default_factory=list, description="One dict per row")
    exit_code: int = Field(0, description="Process exit code this dataset implies")
