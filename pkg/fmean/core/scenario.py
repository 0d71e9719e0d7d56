"""Scenario files: which mean function, space, variables and command to run.

Scenario files are JSON. Outcome indices in partitions are zero-based.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Self

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from ..means.functions import MeanFunction, make_mean_function
from ..pricing.certainty import Filtration
from ..pricing.markov import MarkovChainModel
from ..probability.space import FiniteProbSpace, Partition, RandomVariable
from .exceptions import ConfigurationError

Command = Literal[
    "mean",
    "wmean",
    "cond-mean",
    "var-decomp",
    "prefer",
    "ce",
    "ce-schedule",
    "martingale-check",
    "exit-time",
    "estimate",
    "lln",
    "clt",
    "jensen",
    "independence",
]

_OVERRIDABLE_OPTIONS = ("seed", "workers", "tol")


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    @classmethod
    def from_mapping(cls, payload: Any) -> Self:
        try:
            return cls.model_validate(payload)
        except PydanticValidationError as e:
            raise ConfigurationError(_describe_validation_error(e)) from e


class MeanFunctionSpec(_StrictModel):
    name: str
    params: list[float] = Field(default_factory=list)


class SpaceSpec(_StrictModel):
    probs: list[float]


class ChainSpec(_StrictModel):
    transition: list[list[float]]
    state_values: list[float]
    initial_state: int = 0


class ScenarioOptions(_StrictModel):
    """Command-specific settings; each command reads the subset it needs."""

    N: int | None = None
    L: float | None = None
    horizon: int | None = None
    seed: int = Field(default=0, ge=0)
    n_paths: int = Field(default=100_000, ge=1)
    n: int | None = Field(default=None, ge=1)
    checkpoints: list[int] | None = None
    n_replicates: int = Field(default=10_000, ge=2)
    n_per_replicate: int = Field(default=1_000, ge=1)
    tol: float | None = Field(default=None, gt=0)
    x: str = "X"
    y: str = "Y"
    partition: str | None = None
    coarse: str | None = None
    fine: str | None = None
    points: list[list[float]] | list[float] | None = None
    weights: list[float] | None = None
    atom_weights: list[float] | None = None
    wealth_now: str | None = None
    wealth_terminal: str | None = None
    block: int | None = Field(default=None, ge=0)
    moment_order: float = Field(default=2.0, ge=1)
    workers: int = Field(default=1, ge=1)


class ScenarioConfig(_StrictModel):
    mean_function: MeanFunctionSpec
    command: Command
    space: SpaceSpec | None = None
    variables: dict[str, list[float]] = Field(default_factory=dict)
    partitions: dict[str, list[list[int]]] = Field(default_factory=dict)
    filtration: list[str] = Field(default_factory=list)
    chain: ChainSpec | None = None
    options: ScenarioOptions = Field(default_factory=ScenarioOptions)

    @classmethod
    def load(cls, path: Path) -> ScenarioConfig:
        """Read and validate a scenario file."""
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigurationError(f"Cannot read scenario file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Scenario file {path} is not valid JSON: {e}") from e
        return cls.from_mapping(payload)

    def apply_overrides(self, **overrides: Any) -> ScenarioConfig:
        """Copy with command line seed/workers/tol layered over the file's options."""
        unknown = sorted(k for k in overrides if k not in _OVERRIDABLE_OPTIONS)
        if unknown:
            raise ConfigurationError(f"Cannot override scenario options: {', '.join(unknown)}")
        update = {k: v for k, v in overrides.items() if v is not None}
        if not update:
            return self
        merged = {**self.options.model_dump(), **update}
        return self.model_copy(update={"options": ScenarioOptions.from_mapping(merged)})

    def build_mean_function(self) -> MeanFunction:
        return make_mean_function(self.mean_function.name, self.mean_function.params)

    def build_space(self) -> FiniteProbSpace:
        if self.space is None:
            raise ConfigurationError(f"Command {self.command!r} needs a 'space' section")
        return FiniteProbSpace.from_probs(self.space.probs)

    def variable(self, name: str) -> RandomVariable:
        values = self.variables.get(name)
        if values is None:
            raise ConfigurationError(f"Unresolved variable name {name!r}")
        return self.build_space().variable(values)

    def partition(self, name: str | None) -> Partition:
        if name is None:
            raise ConfigurationError(f"Command {self.command!r} needs a partition name")
        blocks = self.partitions.get(name)
        if blocks is None:
            raise ConfigurationError(f"Unresolved partition name {name!r}")
        return Partition.of(blocks, self.build_space().n_outcomes)

    def build_filtration(self) -> Filtration:
        if not self.filtration:
            raise ConfigurationError("A 'filtration' list of partition names is required")
        return Filtration(tuple(self.partition(name) for name in self.filtration))

    def build_chain(self) -> MarkovChainModel:
        if self.chain is None:
            raise ConfigurationError(f"Command {self.command!r} needs a 'chain' section")
        return MarkovChainModel.of(
            self.chain.transition, self.chain.state_values, self.chain.initial_state
        )


def _describe_validation_error(error: PydanticValidationError) -> str:
    parts: list[str] = []
    for item in error.errors():
        location = ".".join(str(part) for part in item.get("loc", ())) or "<root>"
        parts.append(f"{location}: {item.get('msg', 'invalid value')}")
    return "Invalid scenario: " + "; ".join(parts)
