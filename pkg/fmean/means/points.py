from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from ..core.exceptions import ValidationError
from .functions import FloatArray, MeanFunction, invert

PROBABILITY_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class PointSet:
    """N points of I^d, stored as an (N, d) array."""

    points: FloatArray

    def __post_init__(self) -> None:
        if self.points.ndim != 2:
            raise ValidationError("PointSet expects an (N, d) array")
        if self.points.shape[0] == 0:
            raise ValidationError("PointSet must contain at least one point")
        if self.points.shape[1] < 1:
            raise ValidationError("PointSet points need dimension d >= 1")

    @classmethod
    def from_values(cls, values: ArrayLike) -> PointSet:
        """Accept a flat list of scalars (d = 1) or a list of d-vectors."""
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        return cls(points=arr)

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True, eq=False)
class WeightedDiscreteDistribution:
    """Atoms of I with probabilities and optional per-atom weights w(x)."""

    values: FloatArray
    probs: FloatArray
    weights: FloatArray | None = None

    def __post_init__(self) -> None:
        if self.values.ndim != 1 or self.values.shape != self.probs.shape:
            raise ValidationError("Distribution values and probabilities must align")
        if self.values.size == 0:
            raise ValidationError("Distribution needs at least one atom")
        if np.any(self.probs < 0):
            raise ValidationError("Distribution probabilities must be non-negative")
        total = float(self.probs.sum())
        if abs(total - 1.0) > PROBABILITY_ATOL:
            raise ValidationError(f"Distribution probabilities sum to {total!r}, not 1")
        if self.weights is not None:
            if self.weights.shape != self.values.shape:
                raise ValidationError("Distribution weights must have one entry per atom")
            if np.any(self.weights < 0):
                raise ValidationError("Distribution weights must be non-negative")
            if not np.any(self.weights * self.probs > 0):
                raise ValidationError("Distribution weights put no mass on any atom")

    @classmethod
    def from_atoms(
        cls,
        atoms: Sequence[tuple[float, float]],
        weights: Sequence[float] | None = None,
    ) -> WeightedDiscreteDistribution:
        values = np.array([a[0] for a in atoms], dtype=float)
        probs = np.array([a[1] for a in atoms], dtype=float)
        w = None if weights is None else np.asarray(weights, dtype=float)
        return cls(values=values, probs=probs, weights=w)

    @property
    def effective_weights(self) -> FloatArray:
        if self.weights is None:
            return np.ones_like(self.values)
        return self.weights


def f_distance(f: MeanFunction, x: ArrayLike, y: ArrayLike) -> float:
    """Euclidean distance between f(x) and f(y), componentwise f."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    if xa.shape != ya.shape:
        raise ValidationError(f"Dimension mismatch: {xa.shape} vs {ya.shape}")
    diff = np.asarray(f.evaluate(xa)) - np.asarray(f.evaluate(ya))
    return float(np.linalg.norm(diff))


def f_mean_points(f: MeanFunction, pts: PointSet) -> FloatArray:
    """Componentwise f^-1 of the average of f(x_j); the argmin of sum d_f(x_j, z)^2."""
    transformed = np.asarray(f.evaluate(pts.points))
    return np.atleast_1d(np.asarray(invert(f, transformed.mean(axis=0)), dtype=float))


def weighted_f_mean(f: MeanFunction, values: ArrayLike, weights: ArrayLike) -> float:
    xs = np.atleast_1d(np.asarray(values, dtype=float))
    ws = np.atleast_1d(np.asarray(weights, dtype=float))
    _check_weights(xs, ws)
    transformed = np.asarray(f.evaluate(xs))
    return float(invert(f, float(np.dot(ws, transformed) / ws.sum())))


def weighted_f_distance_sq(
    f: MeanFunction, values: ArrayLike, weights: ArrayLike, m: float
) -> float:
    """sum_k w_k (f(x_k) - f(m))^2, the objective weighted_f_mean minimises."""
    xs = np.atleast_1d(np.asarray(values, dtype=float))
    ws = np.atleast_1d(np.asarray(weights, dtype=float))
    _check_weights(xs, ws)
    diff = np.asarray(f.evaluate(xs)) - float(f.evaluate(m))
    return float(np.dot(ws, diff**2))


def weighted_distribution_f_mean(f: MeanFunction, dist: WeightedDiscreteDistribution) -> float:
    mass = dist.effective_weights * dist.probs
    denominator = float(mass.sum())
    if denominator <= 0:
        raise ValidationError("Weighted distribution has zero total weight")
    transformed = np.asarray(f.evaluate(dist.values))
    return float(invert(f, float(np.dot(mass, transformed) / denominator)))


def distribution_f_distance_sq(
    f: MeanFunction, dist: WeightedDiscreteDistribution, m: float
) -> float:
    """sum_i w(x_i) (f(x_i) - f(m))^2 p_i."""
    mass = dist.effective_weights * dist.probs
    diff = np.asarray(f.evaluate(dist.values)) - float(f.evaluate(m))
    return float(np.dot(mass, diff**2))


def _check_weights(xs: FloatArray, ws: FloatArray) -> None:
    if xs.shape != ws.shape:
        raise ValidationError(f"{xs.size} values but {ws.size} weights")
    if xs.size == 0:
        raise ValidationError("Weighted mean needs at least one value")
    if np.any(ws < 0):
        raise ValidationError("Weights must be non-negative")
    if not ws.sum() > 0:
        raise ValidationError("Weights must not all be zero")
