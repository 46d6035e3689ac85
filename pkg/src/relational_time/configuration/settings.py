"""Configuration management for simulation runs."""

import math
import re
from pathlib import Path
from typing import Any, Literal, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from ..utils.exceptions import ConfigurationError

_PI_EXPRESSION = re.compile(
    r"^(?P<sign>[+-]?)(?:(?P<coef>\d+(?:\.\d*)?|\.\d+)\s*\*?\s*)?pi"
    r"(?:\s*/\s*(?P<den>\d+(?:\.\d*)?|\.\d+))?$"
)


def parse_phase(text: str) -> float:
    """Parse a phase written as a real number or a multiple of pi (`pi/6`, `2*pi/3`).

    Raises:
        ValueError: If the text is neither form
    """
    cleaned = text.strip().lower().replace("π", "pi")
    match = _PI_EXPRESSION.match(cleaned)
    if match is None:
        try:
            return float(cleaned)
        except ValueError:
            raise ValueError(f"cannot parse phase {text!r}") from None
    denominator = float(match["den"] or 1.0)
    if denominator == 0.0:
        raise ValueError(f"cannot parse phase {text!r}: zero denominator")
    value = math.pi * float(match["coef"] or 1.0) / denominator
    return -value if match["sign"] == "-" else value


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: str = Field("WARNING", description="Log level (DEBUG, INFO, WARNING, ERROR)")
    format: Literal["json", "text"] = Field("json", description="Log format (json or text)")


class RunConfig(BaseSettings):
    """Run settings shared by every command."""

    clock_n: int = Field(64, description="Clock lattice size (even, >= 4)")
    dt: float = Field(1.0, description="Clock lattice spacing")
    omega_index: int = Field(3, description="Harmonic j of the commensurate frequency")
    omega: Optional[float] = Field(None, description="Explicit angular frequency override")
    omega_mode: Literal["thickness", "lattice"] = Field(
        "thickness", description="Realize phases by plate thickness or on the fixed lattice ω"
    )
    ka: int = Field(16, description="Clock index of the first measurement")
    kb: int = Field(32, description="Clock index of the second measurement")
    phases: Optional[list[float]] = Field(None, description="Phase grid in radians")
    reference_table: bool = Field(False, description="Emit the published K3 comparison")
    shots: int = Field(0, description="Shots per setting; 0 selects exact probabilities")
    seed: int = Field(12345, description="Master seed for sampled runs")
    out: Optional[Path] = Field(None, description="Output path; stdout when omitted")
    format: Literal["csv", "json"] = Field("csv", description="Output format")
    workers: int = Field(1, description="Threads for sweep points")
    logging: LoggingConfig = Field(default_factory=LoggingConfig, description="Logging")

    model_config = SettingsConfigDict(case_sensitive=False, extra="forbid")

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # flags and config files only; the environment is not a config source
        return (init_settings,)

    @field_validator("phases", mode="before")
    @classmethod
    def _parse_phases(cls, value: Any) -> Any:
        if value is None:
            return None
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        elif not isinstance(value, (list, tuple)):
            value = [value]
        return [parse_phase(item) if isinstance(item, str) else item for item in value]

    @model_validator(mode="after")
    def _check_ranges(self) -> "RunConfig":
        if self.clock_n < 4 or self.clock_n % 2:
            raise ValueError(f"clock_n must be even and >= 4, got {self.clock_n}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 1 <= self.omega_index <= self.clock_n // 2 - 1:
            raise ValueError(
                f"omega_index must satisfy the Nyquist rule 1 <= j <= clock_n/2 - 1 = "
                f"{self.clock_n // 2 - 1}, got {self.omega_index}"
            )
        if not 0 < self.ka < self.kb < self.clock_n:
            raise ValueError(
                f"ka, kb must satisfy 0 < ka < kb < clock_n, got ka={self.ka}, kb={self.kb}"
            )
        if self.shots < 0:
            raise ValueError(f"shots must be >= 0, got {self.shots}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        return self

    @property
    def gap(self) -> int:
        return self.kb - self.ka

    def check_lg_layout(self) -> None:
        """Require the third K3 time t3 = ka + 2·(kb - ka) to lie on the lattice.

        Raises:
            ConfigurationError: Naming kb and its largest valid value
        """
        t3 = self.ka + 2 * self.gap
        if t3 >= self.clock_n:
            raise ConfigurationError(
                f"Invalid configuration: kb: ka + 2·(kb - ka) = {t3} must be < clock_n = "
                f"{self.clock_n} for K3; use kb <= {(self.clock_n + self.ka - 1) // 2}"
            )

    @classmethod
    def build(cls, file_values: dict[str, Any], overrides: dict[str, Any]) -> "RunConfig":
        """Merge file values with flag overrides (flags win) and validate.

        Raises:
            ConfigurationError: Naming the offending key when validation fails
        """
        merged = {**file_values, **{k: v for k, v in overrides.items() if v is not None}}
        try:
            return cls(**merged)
        except ValidationError as e:
            details = "; ".join(
                f"{'.'.join(str(part) for part in error['loc']) or 'config'}: {error['msg']}"
                for error in e.errors()
            )
            raise ConfigurationError(f"Invalid configuration: {details}") from e


def load_config_file(config_file: Path) -> dict[str, Any]:
    """Read a YAML file or ``key=value`` lines into a dict.

    Args:
        config_file: Path to configuration file

    Returns:
        Raw configuration values

    Raises:
        ConfigurationError: If the file is missing or malformed
    """
    try:
        text = config_file.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigurationError(f"Configuration file not found: {config_file}")

    if config_file.suffix.lower() in {".yaml", ".yml"}:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in {config_file}: {e}")
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"Configuration in {config_file} must be a mapping")
        return data

    return _parse_key_values(text, config_file)


def _parse_key_values(text: str, source: Path) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for line_number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"{source}:{line_number}: expected key=value, got {raw!r}")
        key = key.strip().replace("-", "_")
        # YAML scalars give ints, floats, bools and lists the same typing as the YAML files
        parsed = yaml.safe_load(value.strip()) if value.strip() else None
        if key.startswith("logging."):
            values.setdefault("logging", {})[key.split(".", 1)[1]] = parsed
        else:
            values[key] = parsed
    return values
