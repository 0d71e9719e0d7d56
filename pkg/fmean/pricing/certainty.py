"""Certainty equivalents along a filtration.

The price of a terminal cash flow X_T at monitoring index k is the
conditional certainty equivalent C(T|G_k) = u^-1(E[u(X_T)|G_k]). These
prices form a u-martingale: E_u[pi_{k+1}|G_k] = pi_k.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..core.exceptions import PreconditionError, ValidationError
from ..means.functions import Convexity, MeanFunction
from ..probability.conditional import cond_expectation, f_cond_expectation, f_expectation
from ..probability.space import (
    FiniteProbSpace,
    Partition,
    RandomVariable,
    generated_partition,
    refine_check,
)

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Filtration:
    """Increasing partitions G_1 <= ... <= G_m of one space. G_0 is the trivial partition."""

    partitions: tuple[Partition, ...]

    def __post_init__(self) -> None:
        if not self.partitions:
            raise ValidationError("A filtration needs at least one partition")
        n = self.partitions[0].n_outcomes
        for index, partition in enumerate(self.partitions):
            if partition.n_outcomes != n:
                raise ValidationError(
                    f"Filtration level {index + 1} covers {partition.n_outcomes} outcomes, "
                    f"expected {n}"
                )
        for index in range(len(self.partitions) - 1):
            if not refine_check(self.partitions[index], self.partitions[index + 1]):
                raise ValidationError(
                    f"Filtration level {index + 2} does not refine level {index + 1}"
                )

    @classmethod
    def natural(cls, space: FiniteProbSpace, variables: Sequence[RandomVariable]) -> Filtration:
        """G_k = sigma(X_1, ..., X_k)."""
        return cls(
            tuple(
                generated_partition(space, *variables[: k + 1]) for k in range(len(variables))
            )
        )

    @property
    def n_outcomes(self) -> int:
        return self.partitions[0].n_outcomes

    @property
    def m(self) -> int:
        return len(self.partitions)

    def levels(self) -> tuple[Partition, ...]:
        """G_0, G_1, ..., G_m with G_0 trivial."""
        return (Partition.trivial(self.n_outcomes), *self.partitions)


@dataclass(frozen=True, eq=False)
class AdaptedProcess:
    """X_1, ..., X_m with X_k constant on the blocks of G_k."""

    variables: tuple[RandomVariable, ...]
    partitions: tuple[Partition, ...]
    atol: float = 0.0

    def __post_init__(self) -> None:
        if len(self.variables) != len(self.partitions):
            raise ValidationError(
                f"{len(self.variables)} variables for {len(self.partitions)} information levels"
            )
        for index, (rv, partition) in enumerate(
            zip(self.variables, self.partitions, strict=True)
        ):
            if not partition.is_measurable(rv, self.atol):
                raise ValidationError(f"Process value {index} is not measurable at its level")

    def __len__(self) -> int:
        return len(self.variables)

    def __getitem__(self, k: int) -> RandomVariable:
        return self.variables[k]


def certainty_equivalent(u: MeanFunction, space: FiniteProbSpace, X_T: RandomVariable) -> float:
    """C(T) = u^-1(E[u(X_T)])."""
    return f_expectation(u, space, X_T)


def conditional_certainty_equivalent(
    u: MeanFunction, space: FiniteProbSpace, X_T: RandomVariable, G_k: Partition
) -> RandomVariable:
    """C(T|G_k) = E_u[X_T|G_k]."""
    return f_cond_expectation(u, space, X_T, G_k)


def pratt_premium(
    u: MeanFunction, space: FiniteProbSpace, X_T: RandomVariable, G_k: Partition
) -> RandomVariable:
    """E[X_T|G_k] - C(T|G_k); non-negative for concave u."""
    if u.convexity is not Convexity.CONCAVE:
        raise PreconditionError(
            f"Pratt premium needs a concave utility; {u.label} is {u.convexity}"
        )
    mean = cond_expectation(space, X_T, G_k)
    ce = conditional_certainty_equivalent(u, space, X_T, G_k)
    return RandomVariable.of(mean.values - ce.values)


@dataclass(frozen=True, eq=False)
class MartingaleReport:
    prices: AdaptedProcess
    certainty_equivalent: float
    step_residuals: tuple[float, ...]
    initial_residual: float
    tol: float

    @property
    def max_residual(self) -> float:
        return max((self.initial_residual, *self.step_residuals))

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    @property
    def initial_price(self) -> float:
        return float(self.prices[0].values[0])


def u_martingale_check(
    u: MeanFunction,
    space: FiniteProbSpace,
    filtration: Filtration,
    X_T: RandomVariable,
    tol: float = 1e-10,
) -> MartingaleReport:
    """Check E_u[pi_{k+1}|G_k] = pi_k for pi_k = C(T|G_k), k = 0..m, and pi_0 = C(T)."""
    space.require(X_T)
    if filtration.n_outcomes != space.n_outcomes:
        raise ValidationError("Filtration and space disagree on the number of outcomes")
    levels = filtration.levels()
    prices = tuple(conditional_certainty_equivalent(u, space, X_T, G) for G in levels)
    process = AdaptedProcess(prices, levels, atol=tol)

    residuals: list[float] = []
    for k in range(len(levels) - 1):
        projected = f_cond_expectation(u, space, prices[k + 1], levels[k]).values
        current = prices[k].values
        scale = np.maximum(1.0, np.abs(current))
        residuals.append(float(np.max(np.abs(projected - current) / scale)))

    ce = certainty_equivalent(u, space, X_T)
    pi0 = float(prices[0].values[0])
    initial = abs(pi0 - ce) / max(1.0, abs(ce))
    LOGGER.debug("u-martingale residuals %s, pi_0 residual %.3e", residuals, initial)
    return MartingaleReport(
        prices=process,
        certainty_equivalent=ce,
        step_residuals=tuple(residuals),
        initial_residual=initial,
        tol=tol,
    )


def wealth_adjusted_ce(
    u: MeanFunction,
    space: FiniteProbSpace,
    W_n: RandomVariable,
    W_T: RandomVariable,
    X_T: RandomVariable,
    G_n: Partition,
) -> RandomVariable:
    """C(T|G_n) solving u(W_n + C) = E[u(W_T + X_T)|G_n] blockwise."""
    space.require(W_n, W_T, X_T)
    if not G_n.is_measurable(W_n):
        raise ValidationError("Current wealth W_n must be constant on the blocks of G_n")
    total = RandomVariable(values=W_T.values + X_T.values, domain=u.domain)
    ce = f_cond_expectation(u, space, total, G_n)
    return RandomVariable.of(ce.values - W_n.values)
