"""Classical and f-conditional expectation on finite spaces.

Conditional values on blocks of probability zero are set to the unconditional
value (E[X], E_f[X], the f-variance). Any G-measurable choice is a version of
the conditional expectation; this one keeps internality and the tower
identity exact on null blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.exceptions import PreconditionError, ValidationError
from ..means.functions import Convexity, FloatArray, MeanFunction, invert
from .space import FiniteProbSpace, Partition, RandomVariable


def cond_expectation(space: FiniteProbSpace, X: RandomVariable, G: Partition) -> RandomVariable:
    """E[X | G], constant on every block of G."""
    space.require(X)
    _require_partition(space, G)
    return RandomVariable.of(_block_average(space, X.values, G))


def f_distance_rv(
    f: MeanFunction, space: FiniteProbSpace, X: RandomVariable, Y: RandomVariable
) -> float:
    """sqrt(E[(f(X) - f(Y))^2])."""
    space.require(X, Y)
    diff = _transform(f, X) - _transform(f, Y)
    return float(np.sqrt(space.expectation(diff**2)))


def f_cond_expectation(
    f: MeanFunction, space: FiniteProbSpace, X: RandomVariable, G: Partition
) -> RandomVariable:
    """E_f[X | G] = f^-1(E[f(X) | G]), the G-measurable minimiser of d_f(X, .)."""
    space.require(X)
    _require_partition(space, G)
    averaged = _block_average(space, _transform(f, X), G)
    return RandomVariable(
        values=np.asarray(invert(f, averaged), dtype=float).reshape(-1),
        domain=f.domain,
    )


def f_expectation(f: MeanFunction, space: FiniteProbSpace, X: RandomVariable) -> float:
    """E_f[X] = f^-1(E[f(X)])."""
    space.require(X)
    return float(invert(f, space.expectation(_transform(f, X))))


def f_variance(f: MeanFunction, space: FiniteProbSpace, X: RandomVariable) -> float:
    """E[(f(X) - E[f(X)])^2], the squared f-distance from X to its f-mean."""
    space.require(X)
    transformed = _transform(f, X)
    centered = transformed - space.expectation(transformed)
    return float(space.expectation(centered**2))


def f_cond_variance(
    f: MeanFunction, space: FiniteProbSpace, X: RandomVariable, G: Partition
) -> RandomVariable:
    """Blockwise variance of f(X) given G."""
    space.require(X)
    _require_partition(space, G)
    transformed = _transform(f, X)
    centered = transformed - _block_average(space, transformed, G)
    fallback = f_variance(f, space, X)
    block_var = _block_average(space, centered**2, G, fallback=fallback)
    return RandomVariable.of(np.maximum(block_var, 0.0))


def total_variance_check(
    f: MeanFunction, space: FiniteProbSpace, X: RandomVariable, G: Partition
) -> tuple[float, float]:
    """Both sides of sigma_f^2(X) = E[sigma_f^2(X|G)] + sigma_f^2(E_f[X|G])."""
    lhs = f_variance(f, space, X)
    within = space.expectation(f_cond_variance(f, space, X, G).values)
    between = f_variance(f, space, f_cond_expectation(f, space, X, G))
    return lhs, within + between


def f_independent(
    f: MeanFunction,
    space: FiniteProbSpace,
    X: RandomVariable,
    G: Partition,
    tol: float = 1e-10,
) -> bool:
    """True iff E_f[X | G] equals the constant E_f[X] on every positive block."""
    conditional = f_cond_expectation(f, space, X, G).values
    unconditional = f_expectation(f, space, X)
    mass = _block_mass(space, G)
    for index, block in enumerate(G.blocks):
        if mass[index] <= 0:
            continue
        value = conditional[block[0]]
        if abs(value - unconditional) > tol * max(1.0, abs(unconditional)):
            return False
    return True


def f_moment(f: MeanFunction, space: FiniteProbSpace, X: RandomVariable, p: float) -> float:
    """E[|f(X)|^p]; finite for every X on a finite space, so X is in L_f^p for all p."""
    if not p >= 1:
        raise ValidationError(f"Moment order must be at least 1, got {p}")
    space.require(X)
    return float(space.expectation(np.abs(_transform(f, X)) ** p))


@dataclass(frozen=True, eq=False)
class JensenOrdering:
    """The three predictors E_f[X|G], E[X|G], E_{f^-1}[X|G] and their ordering."""

    convexity: Convexity
    f_predictor: RandomVariable
    mean_predictor: RandomVariable
    inverse_predictor: RandomVariable
    max_violation: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.max_violation <= self.tol

    def as_triple(self) -> tuple[RandomVariable, RandomVariable, RandomVariable]:
        return self.f_predictor, self.mean_predictor, self.inverse_predictor


def jensen_order_check(
    f: MeanFunction,
    space: FiniteProbSpace,
    X: RandomVariable,
    G: Partition,
    tol: float = 1e-12,
) -> JensenOrdering:
    """Compare the f, classical and f^-1 predictors of X given G.

    Concave f: E_f <= E <= E_{f^-1}. Convex f: the reverse.
    """
    if f.convexity is Convexity.NEITHER:
        raise PreconditionError(
            f"{f.label} is neither concave nor convex; the predictors admit no ordering"
        )
    common = f.domain.intersect(f.codomain)
    if common is None:
        raise PreconditionError(
            f"Domain {f.domain} and codomain {f.codomain} of {f.label} do not overlap"
        )
    common.require(X.values, what="Random variable value")

    f_pred = f_cond_expectation(f, space, X, G)
    mean_pred = cond_expectation(space, X, G)
    inverse_pred = f_cond_expectation(f.swapped(), space, X, G)
    if f.convexity is Convexity.CONCAVE:
        lower, upper = f_pred.values, inverse_pred.values
    else:
        lower, upper = inverse_pred.values, f_pred.values
    middle = mean_pred.values
    scale = np.maximum(1.0, np.abs(middle))
    violation = np.maximum(lower - middle, middle - upper) / scale
    return JensenOrdering(
        convexity=f.convexity,
        f_predictor=f_pred,
        mean_predictor=mean_pred,
        inverse_predictor=inverse_pred,
        max_violation=float(max(0.0, violation.max())),
        tol=tol,
    )


def _transform(f: MeanFunction, X: RandomVariable) -> FloatArray:
    return np.asarray(f.evaluate(X.values), dtype=float).reshape(-1)


def _require_partition(space: FiniteProbSpace, G: Partition) -> None:
    if G.n_outcomes != space.n_outcomes:
        raise ValidationError(
            f"Partition covers {G.n_outcomes} outcomes but the space has {space.n_outcomes}"
        )


def _block_mass(space: FiniteProbSpace, G: Partition) -> FloatArray:
    return np.bincount(G.labels, weights=space.probs, minlength=G.n_blocks)


def _block_average(
    space: FiniteProbSpace,
    values: FloatArray,
    G: Partition,
    fallback: float | None = None,
) -> FloatArray:
    """Per-outcome value of E[values | G]; null blocks take `fallback` (default E[values])."""
    mass = _block_mass(space, G)
    sums = np.bincount(G.labels, weights=space.probs * values, minlength=G.n_blocks)
    if fallback is None:
        fallback = space.expectation(values)
    positive = mass > 0
    per_block = np.full(G.n_blocks, fallback, dtype=float)
    per_block[positive] = sums[positive] / mass[positive]
    # keep block averages inside the hull of the block's values against rounding
    for index in np.flatnonzero(positive):
        block_values = values[list(G.blocks[index])]
        per_block[index] = min(max(per_block[index], block_values.min()), block_values.max())
    return per_block[G.labels]
