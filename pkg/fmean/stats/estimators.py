"""Sampling and the empirical f-mean: unbiasedness, LLN and CLT diagnostics."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import stats as scipy_stats

from ..core.exceptions import PreconditionError, ValidationError
from ..means.functions import FloatArray, MeanFunction, invert
from ..probability.conditional import f_expectation, f_variance
from ..probability.space import FiniteProbSpace, Partition, RandomVariable, restrict
from .streams import Chunk, chunk_ranges, run_chunks, stream

LOGGER = logging.getLogger(__name__)

MAX_ENUMERATION = 1_000_000
KS_CRITICAL_1PCT = 1.63
CLT_QUANTILES = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)
_SAMPLE_STREAM_TAG = 2
_CLT_STREAM_TAG = 3
_CLT_CHUNK_REPLICATES = 64


@dataclass(frozen=True, eq=False)
class SamplerSpec:
    """n i.i.d. draws of X under the space's probabilities, from a seeded stream."""

    space: FiniteProbSpace
    variable: RandomVariable
    seed: int
    n: int

    def __post_init__(self) -> None:
        self.space.require(self.variable)
        if self.n < 1:
            raise ValidationError(f"Sample size must be at least 1, got {self.n}")
        if self.seed < 0:
            raise ValidationError("Seed must be non-negative")

    @property
    def degenerate(self) -> bool:
        """True when X takes a single value on the positive-probability outcomes."""
        support = self.variable.values[self.space.probs > 0]
        return bool(support.min() == support.max())


def sample(sampler: SamplerSpec) -> FloatArray:
    """Draw sampler.n values of X by inverse CDF on the finite distribution."""
    rng = stream(sampler.seed, _SAMPLE_STREAM_TAG)
    return sampler.variable.values[_draw_indices(sampler.space, rng, sampler.n)]


def empirical_f_mean(f: MeanFunction, values: Sequence[float] | FloatArray) -> float:
    """f^-1((f(X_1) + ... + f(X_N)) / N)."""
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValidationError("Empirical f-mean needs at least one observation")
    return float(invert(f, float(np.mean(np.asarray(f.evaluate(arr))))))


def f_unbiasedness_check(
    f: MeanFunction, space: FiniteProbSpace, X: RandomVariable, N: int
) -> tuple[float, float]:
    """E_f of the N-sample estimator by exact enumeration, against E_f[X].

    The left side is f^-1 of the expectation of (1/N) sum f(X_k) over all
    |Omega|^N tuples weighted by product probabilities.
    """
    space.require(X)
    if N < 1:
        raise ValidationError(f"Sample size must be at least 1, got {N}")
    n = space.n_outcomes
    if n**N > MAX_ENUMERATION:
        raise PreconditionError(
            f"Enumerating {n}^{N} sample tuples exceeds the limit of {MAX_ENUMERATION}"
        )
    grids = np.meshgrid(*([np.arange(n)] * N), indexing="ij")
    tuples = np.stack(grids, axis=-1).reshape(-1, N)
    transformed = np.asarray(f.evaluate(X.values), dtype=float)
    weights = np.prod(space.probs[tuples], axis=1)
    averages = transformed[tuples].mean(axis=1)
    lhs = float(invert(f, float(np.dot(weights, averages))))
    return lhs, f_expectation(f, space, X)


@dataclass(frozen=True)
class LlnReport:
    target: float
    sigma_f: float
    bound: float
    rows: tuple[tuple[int, float], ...]

    @property
    def final_error(self) -> float:
        return self.rows[-1][1]

    @property
    def passed(self) -> bool:
        return self.final_error <= self.bound


def lln_diagnostic(f: MeanFunction, sampler: SamplerSpec, checkpoints: Sequence[int]) -> LlnReport:
    """Running empirical f-mean error along one seeded path.

    Acceptance at the last checkpoint N uses the delta-method scale
    4 sigma_f / (|f'(E_f[X])| sqrt(N)).
    """
    marks = _validate_checkpoints(checkpoints, sampler.n)
    target = f_expectation(f, sampler.space, sampler.variable)
    if sampler.degenerate:
        return LlnReport(target, 0.0, 0.0, tuple((m, 0.0) for m in marks))

    sigma_f = math.sqrt(f_variance(f, sampler.space, sampler.variable))
    transformed = np.asarray(f.evaluate(sampler.variable.values), dtype=float)
    indices = _draw_indices(sampler.space, stream(sampler.seed, _SAMPLE_STREAM_TAG), sampler.n)
    running = np.cumsum(transformed[indices])
    rows: list[tuple[int, float]] = []
    for mark in marks:
        estimate = float(invert(f, float(running[mark - 1] / mark)))
        rows.append((mark, abs(estimate - target)))
    slope = abs(f.derivative(target))
    bound = 4.0 * sigma_f / (slope * math.sqrt(marks[-1]))
    LOGGER.debug("lln %s: final error %.3e bound %.3e", f.label, rows[-1][1], bound)
    return LlnReport(target, sigma_f, bound, tuple(rows))


def conditional_lln_diagnostic(
    f: MeanFunction,
    space: FiniteProbSpace,
    X: RandomVariable,
    G: Partition,
    block: int,
    seed: int,
    checkpoints: Sequence[int],
) -> LlnReport:
    """LLN for draws from P(. | B) on one block B of G; the target is E_f[X|G] on B."""
    if not 0 <= block < G.n_blocks:
        raise ValidationError(f"Block {block} is not a block index of the partition")
    sub_space, sub_variable = restrict(space, X, G.blocks[block])
    n = max(checkpoints) if checkpoints else 0
    return lln_diagnostic(f, SamplerSpec(sub_space, sub_variable, seed, n), checkpoints)


@dataclass(frozen=True)
class CltReport:
    n_replicates: int
    n_per_replicate: int
    mu_f: float
    sigma_f: float
    ks_statistic: float
    critical_value: float
    quantiles: dict[float, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.ks_statistic <= self.critical_value


def clt_check(
    f: MeanFunction,
    sampler: SamplerSpec,
    n_replicates: int,
    n_per_replicate: int,
    workers: int = 1,
) -> CltReport:
    """KS distance between standardised replicate sums and N(0, 1).

    Each replicate forms S_n = sum (f(X_k) - E[f(X)]) and Z_n = S_n / (sigma_f sqrt(n)).
    Centering uses E[f(X)]; centering by E_f[X] would not give mean zero.
    """
    if n_replicates < 2 or n_per_replicate < 1:
        raise ValidationError("CLT check needs at least two replicates of size >= 1")
    if sampler.degenerate:
        raise PreconditionError("X is constant, so sigma_f = 0 and sums cannot be standardised")
    transformed = np.asarray(f.evaluate(sampler.variable.values), dtype=float)
    centre = sampler.space.expectation(transformed)
    sigma_f = math.sqrt(f_variance(f, sampler.space, sampler.variable))
    scale = sigma_f * math.sqrt(n_per_replicate)

    def standardized(chunk: Chunk) -> FloatArray:
        rng = stream(sampler.seed, _CLT_STREAM_TAG, chunk.index)
        indices = _draw_indices(sampler.space, rng, chunk.size * n_per_replicate)
        sums = transformed[indices].reshape(chunk.size, n_per_replicate).sum(axis=1)
        return (sums - n_per_replicate * centre) / scale

    chunks = chunk_ranges(n_replicates, _CLT_CHUNK_REPLICATES)
    z = np.concatenate(run_chunks(standardized, chunks, workers))
    ks = float(scipy_stats.kstest(z, "norm").statistic)
    levels = np.quantile(z, CLT_QUANTILES)
    quantiles = {q: float(v) for q, v in zip(CLT_QUANTILES, levels, strict=True)}
    return CltReport(
        n_replicates=n_replicates,
        n_per_replicate=n_per_replicate,
        mu_f=f_expectation(f, sampler.space, sampler.variable),
        sigma_f=sigma_f,
        ks_statistic=ks,
        critical_value=KS_CRITICAL_1PCT / math.sqrt(n_replicates),
        quantiles=quantiles,
    )


def _draw_indices(space: FiniteProbSpace, rng: np.random.Generator, n: int) -> NDArray[np.intp]:
    cumulative = np.cumsum(space.probs)
    draws = rng.random(n)
    indices = np.searchsorted(cumulative, draws, side="right")
    return np.minimum(indices, space.n_outcomes - 1)


def _validate_checkpoints(checkpoints: Sequence[int], n: int) -> list[int]:
    marks = [int(c) for c in checkpoints]
    if not marks:
        raise ValidationError("At least one checkpoint is required")
    if any(b <= a for a, b in zip(marks, marks[1:], strict=False)):
        raise ValidationError("Checkpoints must be strictly increasing")
    if marks[0] < 1 or marks[-1] > n:
        raise ValidationError(f"Checkpoints must lie in 1..{n}")
    return marks
