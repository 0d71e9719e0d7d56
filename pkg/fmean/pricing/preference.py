from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from ..core.exceptions import ValidationError
from ..means.functions import FloatArray, MeanFunction
from ..probability.conditional import cond_expectation
from ..probability.space import FiniteProbSpace, Partition, RandomVariable, refine_check


class Preference(StrEnum):
    X_PREFERRED = "X_preferred"
    Y_PREFERRED = "Y_preferred"
    INDIFFERENT = "indifferent"


def prefer(
    u: MeanFunction,
    space: FiniteProbSpace,
    X: RandomVariable,
    Y: RandomVariable,
    G: Partition,
    tol: float = 1e-12,
) -> tuple[Preference, ...]:
    """Per-outcome choice between X and Y given G.

    Compares E[u(X)|G] with E[u(Y)|G], which orders the same way as
    E_u[X|G] and E_u[Y|G] because u^-1 is increasing.
    """
    ux = _expected_utility(u, space, X, G)
    uy = _expected_utility(u, space, Y, G)
    scale = np.maximum(1.0, np.maximum(np.abs(ux), np.abs(uy)))
    out: list[Preference] = []
    for a, b, s in zip(ux, uy, scale, strict=True):
        if abs(a - b) <= tol * s:
            out.append(Preference.INDIFFERENT)
        elif a < b:
            out.append(Preference.Y_PREFERRED)
        else:
            out.append(Preference.X_PREFERRED)
    return tuple(out)


@dataclass(frozen=True)
class PreferenceConsistency:
    """Outcome of checking that a G2 preference for Y survives coarsening to G1."""

    hypothesis_holds: bool
    consistent: bool
    violating_blocks: tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return self.hypothesis_holds and self.consistent

    @property
    def status(self) -> str:
        if not self.hypothesis_holds:
            return "HYPOTHESIS-FAILED"
        return "PASS" if self.consistent else "FAIL"


def preference_consistency_check(
    u: MeanFunction,
    space: FiniteProbSpace,
    X: RandomVariable,
    Y: RandomVariable,
    G1: Partition,
    G2: Partition,
    tol: float = 1e-12,
) -> PreferenceConsistency:
    """If Y is weakly preferred on every block of the finer G2, it is on every block of G1."""
    if not refine_check(G1, G2):
        raise ValidationError("G2 must refine G1 for a consistency check")
    fine = prefer(u, space, X, Y, G2, tol)
    if any(choice is Preference.X_PREFERRED for choice in fine):
        return PreferenceConsistency(hypothesis_holds=False, consistent=False)
    coarse = prefer(u, space, X, Y, G1, tol)
    violating = tuple(
        index
        for index, block in enumerate(G1.blocks)
        if coarse[block[0]] is Preference.X_PREFERRED
    )
    return PreferenceConsistency(
        hypothesis_holds=True,
        consistent=not violating,
        violating_blocks=violating,
    )


def _expected_utility(
    u: MeanFunction, space: FiniteProbSpace, X: RandomVariable, G: Partition
) -> FloatArray:
    utility = RandomVariable.of(np.asarray(u.evaluate(X.values), dtype=float).reshape(-1))
    return cond_expectation(space, utility, G).values
