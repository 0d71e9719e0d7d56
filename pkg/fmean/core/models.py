from __future__ import annotations

import math
import numbers
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict
from pydantic import ValidationError as PydanticValidationError

from .exceptions import ConfigurationError

Scalar = float | int | str | bool | None
Cell = float | int | str | None

VERIFIED = "PASS"
FAILED = "FAIL"
HYPOTHESIS_FAILED = "HYPOTHESIS-FAILED"
COMPUTED = "OK"
_STATUSES = (VERIFIED, FAILED, HYPOTHESIS_FAILED, COMPUTED)


@dataclass(frozen=True)
class ResultTable:
    """A titled table of result rows, rendered as text or CSV."""

    title: str
    columns: tuple[str, ...]
    rows: tuple[tuple[Cell, ...], ...] = ()

    def __post_init__(self) -> None:
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise ConfigurationError(
                    f"Table {self.title!r} row has {len(row)} cells for {width} columns"
                )

    @classmethod
    def build(
        cls, title: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]
    ) -> ResultTable:
        return cls(
            title=title,
            columns=tuple(columns),
            rows=tuple(tuple(_cell(value) for value in row) for row in rows),
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "columns": list(self.columns),
            "rows": [list(row) for row in self.rows],
        }


@dataclass(frozen=True)
class CommandResult:
    """Everything one command produced; the content of a structured result file."""

    command: str
    mean_function: str
    status: str = COMPUTED
    values: dict[str, Scalar] = field(default_factory=dict)
    tables: tuple[ResultTable, ...] = ()

    def __post_init__(self) -> None:
        if self.status not in _STATUSES:
            raise ConfigurationError(f"Unknown result status {self.status!r}")

    @property
    def failed(self) -> bool:
        return self.status == FAILED

    @classmethod
    def from_mapping(cls, payload: Mapping[str, Any]) -> CommandResult:
        """Revalidate a parsed structured result file."""
        try:
            record = _ResultRecord.model_validate(payload)
        except PydanticValidationError as e:
            raise ConfigurationError(f"Invalid result record: {e}") from e
        return cls(
            command=record.command,
            mean_function=record.mean_function,
            status=record.status,
            values=dict(record.values),
            tables=tuple(
                ResultTable(
                    title=table.title,
                    columns=tuple(table.columns),
                    rows=tuple(tuple(row) for row in table.rows),
                )
                for table in record.tables
            ),
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "mean_function": self.mean_function,
            "status": self.status,
            "values": dict(self.values),
            "tables": [table.as_dict() for table in self.tables],
        }


class _TableRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    title: str
    columns: list[str]
    rows: list[list[float | int | str | None]]


class _ResultRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: str
    mean_function: str
    status: str
    values: dict[str, float | int | str | bool | None]
    tables: list[_TableRecord]


def status_of(passed: bool) -> str:
    return VERIFIED if passed else FAILED


def scalar(value: Any) -> Scalar:
    """Plain JSON value for numpy scalars; non-finite floats become strings."""
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, bool | np.bool_):
        return bool(value)
    if isinstance(value, numbers.Integral):
        return int(value)
    number = float(value)
    if math.isfinite(number):
        return number
    return "inf" if number > 0 else ("-inf" if number < 0 else "nan")


def _cell(value: Any) -> Cell:
    converted = scalar(value)
    if isinstance(converted, bool):
        return str(converted).lower()
    return converted
