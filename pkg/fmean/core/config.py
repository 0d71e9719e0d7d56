from __future__ import annotations

import logging
import os
import sys
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any, TypedDict

from .exceptions import ConfigurationError

_CONFIG_OVERRIDE_KEYS = frozenset(
    {
        "config_path",
        "out_path",
        "output_format",
        "seed",
        "workers",
        "tol",
        "log_level",
    }
)

_VALID_OUTPUT_FORMATS = ("table", "csv", "structured")
_LOG_LEVELS = {
    "error": logging.ERROR,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


class _RunConfigValues(TypedDict):
    config_path: Path | None
    out_path: Path | None
    output_format: str
    seed: int | None
    workers: int | None
    tol: float | None
    log_level: str


@dataclass
class RunConfig:
    """Configuration for one command line invocation."""

    config_path: Path | None = None
    out_path: Path | None = None
    output_format: str = "table"
    seed: int | None = None
    workers: int | None = None
    tol: float | None = None
    log_level: str = "error"

    @classmethod
    def from_args(cls, **kwargs: Any) -> RunConfig:
        """Create configuration from keyword arguments layered over the environment."""
        unknown = sorted(
            key
            for key, value in kwargs.items()
            if value is not None and key not in _CONFIG_OVERRIDE_KEYS
        )
        if unknown:
            joined = ", ".join(unknown)
            raise ConfigurationError(f"Unknown configuration arguments: {joined}")

        values = _config_values_from_environment()
        _apply_config_overrides(values, kwargs)
        return cls._from_values(values)

    def validate(self) -> None:
        """Validate the configuration."""
        if self.config_path is None:
            raise ConfigurationError("--config is required")

        if self.output_format not in _VALID_OUTPUT_FORMATS:
            raise ConfigurationError(
                f"Invalid format: {self.output_format}. "
                f"Must be one of {', '.join(_VALID_OUTPUT_FORMATS)}"
            )

        if self.workers is not None and self.workers < 1:
            raise ConfigurationError("Worker count must be positive")

        if self.seed is not None and self.seed < 0:
            raise ConfigurationError("Seed must be non-negative")

        if self.tol is not None and not self.tol > 0:
            raise ConfigurationError("Tolerance must be positive")

        if self.log_level not in _LOG_LEVELS:
            raise ConfigurationError(
                f"Invalid FMEAN_LOG value: {self.log_level}. "
                f"Must be one of {', '.join(_LOG_LEVELS)}"
            )

    @classmethod
    def _from_values(cls, values: _RunConfigValues) -> RunConfig:
        config = cls(**values)
        config.validate()
        return config

    @property
    def scenario_overrides(self) -> dict[str, Any]:
        """Overrides forwarded into the scenario options."""
        overrides: dict[str, Any] = {}
        if self.seed is not None:
            overrides["seed"] = self.seed
        if self.workers is not None:
            overrides["workers"] = self.workers
        if self.tol is not None:
            overrides["tol"] = self.tol
        return overrides


def configure_logging(config: RunConfig) -> None:
    """Route library log records to stderr at the configured level."""
    logging.basicConfig(
        level=_LOG_LEVELS[config.log_level],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def make_debug(config: RunConfig) -> Callable[[str], None]:
    """Create a debug callback that is silent unless FMEAN_LOG=debug."""
    enabled = config.log_level == "debug"

    def _debug(message: str) -> None:
        if enabled:
            print(f"[debug] {message}", file=sys.stderr)

    return _debug


def _parse_workers(value: str | None) -> int | None:
    if value is None or not value.strip():
        return None
    try:
        return int(value.strip())
    except ValueError:
        return None


def _config_values_from_environment() -> _RunConfigValues:
    return {
        "config_path": None,
        "out_path": None,
        "output_format": "table",
        "seed": None,
        "workers": _parse_workers(os.environ.get("FMEAN_WORKERS")),
        "tol": None,
        "log_level": os.environ.get("FMEAN_LOG", "error").strip().lower() or "error",
    }


def _apply_config_overrides(values: _RunConfigValues, kwargs: Mapping[str, Any]) -> None:
    config_path = kwargs.get("config_path")
    if config_path is not None:
        values["config_path"] = Path(config_path)

    out_path = kwargs.get("out_path")
    if out_path is not None:
        values["out_path"] = Path(out_path)

    output_format = kwargs.get("output_format")
    if output_format is not None:
        values["output_format"] = output_format

    seed = kwargs.get("seed")
    if seed is not None:
        values["seed"] = int(seed)

    workers = kwargs.get("workers")
    if workers is not None:
        values["workers"] = int(workers)

    tol = kwargs.get("tol")
    if tol is not None:
        values["tol"] = float(tol)

    log_level = kwargs.get("log_level")
    if log_level is not None:
        values["log_level"] = str(log_level).strip().lower()
