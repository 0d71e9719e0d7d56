"""Finite probability spaces, partition sigma-algebras and random variables."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..core.exceptions import ValidationError
from ..means.functions import FloatArray
from ..means.intervals import Interval

PROBABILITY_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteProbSpace:
    """Outcomes 0..n-1 with probabilities summing to one."""

    probs: FloatArray

    def __post_init__(self) -> None:
        if self.probs.ndim != 1 or self.probs.size == 0:
            raise ValidationError("A probability space needs a non-empty 1-d probability vector")
        if not np.all(np.isfinite(self.probs)):
            raise ValidationError("Probabilities must be finite")
        if np.any(self.probs < 0):
            raise ValidationError("Probabilities must be non-negative")
        total = float(self.probs.sum())
        if abs(total - 1.0) > PROBABILITY_ATOL:
            raise ValidationError(
                f"Probabilities must sum to 1 within {PROBABILITY_ATOL:g}, got {total!r}"
            )

    @classmethod
    def from_probs(cls, probs: ArrayLike) -> FiniteProbSpace:
        return cls(probs=np.asarray(probs, dtype=float))

    @classmethod
    def uniform(cls, n: int) -> FiniteProbSpace:
        if n < 1:
            raise ValidationError("A uniform space needs at least one outcome")
        return cls(probs=np.full(n, 1.0 / n))

    @property
    def n_outcomes(self) -> int:
        return int(self.probs.size)

    def expectation(self, values: ArrayLike) -> float:
        return float(np.dot(self.probs, np.asarray(values, dtype=float)))

    def variable(self, values: ArrayLike, domain: Interval | None = None) -> RandomVariable:
        """Attach a value vector to this space, checking its length."""
        rv = RandomVariable.of(values, domain)
        self.require(rv)
        return rv

    def require(self, *variables: RandomVariable) -> None:
        for rv in variables:
            if rv.n_outcomes != self.n_outcomes:
                raise ValidationError(
                    f"Random variable has {rv.n_outcomes} values but the space has "
                    f"{self.n_outcomes} outcomes"
                )


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint non-empty blocks covering every outcome; a finite sigma-algebra."""

    blocks: tuple[tuple[int, ...], ...]
    n_outcomes: int

    def __post_init__(self) -> None:
        if self.n_outcomes < 1:
            raise ValidationError("A partition needs at least one outcome")
        seen: set[int] = set()
        for index, block in enumerate(self.blocks):
            if not block:
                raise ValidationError(f"Partition block {index} is empty")
            for outcome in block:
                if not 0 <= outcome < self.n_outcomes:
                    raise ValidationError(
                        f"Partition block {index} names outcome {outcome} outside "
                        f"0..{self.n_outcomes - 1}"
                    )
                if outcome in seen:
                    raise ValidationError(f"Outcome {outcome} appears in more than one block")
                seen.add(outcome)
        if len(seen) != self.n_outcomes:
            missing = sorted(set(range(self.n_outcomes)) - seen)
            raise ValidationError(f"Partition does not cover outcomes {missing}")

    @classmethod
    def of(cls, blocks: Iterable[Iterable[int]], n_outcomes: int) -> Partition:
        normalized = tuple(tuple(sorted(int(o) for o in block)) for block in blocks)
        return cls(blocks=normalized, n_outcomes=n_outcomes)

    @classmethod
    def trivial(cls, n_outcomes: int) -> Partition:
        return cls.of([range(n_outcomes)], n_outcomes)

    @classmethod
    def singletons(cls, n_outcomes: int) -> Partition:
        return cls.of([[i] for i in range(n_outcomes)], n_outcomes)

    @classmethod
    def from_labels(cls, labels: ArrayLike) -> Partition:
        """Group outcomes with equal labels, blocks ordered by first appearance."""
        arr = np.asarray(labels)
        order: dict[object, list[int]] = {}
        for outcome, label in enumerate(arr.tolist()):
            key = tuple(label) if isinstance(label, list) else label
            order.setdefault(key, []).append(outcome)
        return cls.of(order.values(), int(arr.shape[0]))

    @cached_property
    def labels(self) -> NDArray[np.intp]:
        """Block index of every outcome."""
        out = np.empty(self.n_outcomes, dtype=np.intp)
        for index, block in enumerate(self.blocks):
            out[list(block)] = index
        return out

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def refines(self, coarse: Partition) -> bool:
        return refine_check(coarse, self)

    def is_measurable(self, rv: RandomVariable, atol: float = 0.0) -> bool:
        """True when `rv` is constant on every block."""
        for block in self.blocks:
            vals = rv.values[list(block)]
            if float(vals.max() - vals.min()) > atol:
                return False
        return True


@dataclass(frozen=True, eq=False)
class RandomVariable:
    """One real value per outcome, tagged with the interval it must live in."""

    values: FloatArray
    domain: Interval = Interval.real_line()

    def __post_init__(self) -> None:
        if self.values.ndim != 1:
            raise ValidationError("Random variable values must be a 1-d vector")
        self.domain.require(self.values, what="Random variable value")

    @classmethod
    def of(cls, values: ArrayLike, domain: Interval | None = None) -> RandomVariable:
        return cls(
            values=np.asarray(values, dtype=float),
            domain=domain or Interval.real_line(),
        )

    @classmethod
    def constant(cls, value: float, n_outcomes: int) -> RandomVariable:
        return cls.of(np.full(n_outcomes, float(value)))

    @property
    def n_outcomes(self) -> int:
        return int(self.values.size)

    def __add__(self, other: RandomVariable) -> RandomVariable:
        return RandomVariable.of(self.values + other.values)

    def __mul__(self, other: RandomVariable) -> RandomVariable:
        return RandomVariable.of(self.values * other.values)


def refine_check(coarse: Partition, fine: Partition) -> bool:
    """True iff every block of `fine` lies inside one block of `coarse`."""
    if coarse.n_outcomes != fine.n_outcomes:
        raise ValidationError(
            f"Partitions cover {coarse.n_outcomes} and {fine.n_outcomes} outcomes"
        )
    coarse_labels = coarse.labels
    return all(len({int(coarse_labels[o]) for o in block}) == 1 for block in fine.blocks)


def generated_partition(space: FiniteProbSpace, *variables: RandomVariable) -> Partition:
    """The partition sigma(X_1, ..., X_k): outcomes sharing every value share a block."""
    space.require(*variables)
    if not variables:
        return Partition.trivial(space.n_outcomes)
    stacked = np.stack([rv.values for rv in variables], axis=1)
    return Partition.from_labels(stacked)


def product_space(
    first: Sequence[float], second: Sequence[float]
) -> tuple[FiniteProbSpace, Partition, Partition]:
    """P1 x P2 on outcomes i * len(second) + j, with the partitions generated by each factor."""
    p1 = np.asarray(first, dtype=float)
    p2 = np.asarray(second, dtype=float)
    space = FiniteProbSpace.from_probs(np.outer(p1, p2).ravel())
    n1, n2 = p1.size, p2.size
    by_first = Partition.of([[i * n2 + j for j in range(n2)] for i in range(n1)], n1 * n2)
    by_second = Partition.of([[i * n2 + j for i in range(n1)] for j in range(n2)], n1 * n2)
    return space, by_first, by_second


def restrict(
    space: FiniteProbSpace, rv: RandomVariable, block: Sequence[int]
) -> tuple[FiniteProbSpace, RandomVariable]:
    """The conditional space P(. | B) on the outcomes of `block`, and X restricted to it."""
    space.require(rv)
    outcomes = list(block)
    mass = float(space.probs[outcomes].sum())
    if mass <= 0:
        raise ValidationError("Cannot condition on a block of probability zero")
    sub_space = FiniteProbSpace.from_probs(space.probs[outcomes] / mass)
    return sub_space, RandomVariable(values=rv.values[outcomes], domain=rv.domain)
