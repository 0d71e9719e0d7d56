"""Certainty-equivalent schedules for Markov cash flows and exit-time probabilities.

With observation times k = 0..N and a payoff v(X_N), the conditional
certainty equivalent at time k depends only on the current state:
C_k(s) = u^-1((P^(N-k) u(v))(s)).
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..core.exceptions import PreconditionError, ValidationError
from ..means.functions import FloatArray, MeanFunction, invert
from ..probability.space import FiniteProbSpace, Partition, RandomVariable
from ..stats.streams import Chunk, chunk_ranges, run_chunks, stream
from .certainty import Filtration

LOGGER = logging.getLogger(__name__)

STOCHASTIC_ATOL = 1e-12
MAX_PATH_SPACE = 4096
MAX_ENUMERATED_PATHS = 1_000_000
_EXIT_STREAM_TAG = 1


@dataclass(frozen=True, eq=False)
class MarkovChainModel:
    """Finite chain with row-stochastic transitions and a value per state."""

    transition: FloatArray
    state_values: FloatArray
    initial_state: int = 0

    def __post_init__(self) -> None:
        P = self.transition
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
            raise ValidationError("Transition matrix must be square and non-empty")
        if not np.all(np.isfinite(P)) or np.any(P < 0):
            raise ValidationError("Transition probabilities must be finite and non-negative")
        row_sums = P.sum(axis=1)
        worst = int(np.argmax(np.abs(row_sums - 1.0)))
        if abs(row_sums[worst] - 1.0) > STOCHASTIC_ATOL:
            raise ValidationError(
                f"Transition row {worst} sums to {row_sums[worst]!r}, not 1"
            )
        if self.state_values.shape != (P.shape[0],):
            raise ValidationError("Need exactly one value per state")
        if not 0 <= self.initial_state < P.shape[0]:
            raise ValidationError(f"Initial state {self.initial_state} is not a state index")

    @classmethod
    def of(
        cls, transition: ArrayLike, state_values: ArrayLike, initial_state: int = 0
    ) -> MarkovChainModel:
        return cls(
            transition=np.asarray(transition, dtype=float),
            state_values=np.asarray(state_values, dtype=float),
            initial_state=int(initial_state),
        )

    @property
    def n_states(self) -> int:
        return int(self.transition.shape[0])


@dataclass(frozen=True, eq=False)
class CeSchedule:
    """C_k(s) for k = 0..N; row N is the payoff v itself."""

    values: FloatArray
    horizon: int

    def at(self, k: int, state: int) -> float:
        return float(self.values[k, state])


def markov_ce_schedule(u: MeanFunction, chain: MarkovChainModel, N: int) -> CeSchedule:
    if N < 1:
        raise ValidationError(f"Horizon N must be at least 1, got {N}")
    utilities = np.asarray(u.evaluate(chain.state_values), dtype=float)
    lo, hi = float(utilities.min()), float(utilities.max())
    rows = np.empty((N + 1, chain.n_states), dtype=float)
    for k in range(N + 1):
        averaged = np.linalg.matrix_power(chain.transition, N - k) @ utilities
        # stochastic averages stay in the hull of u(v); clip rounding drift
        rows[k] = np.asarray(invert(u, np.clip(averaged, lo, hi)), dtype=float)
    rows[N] = chain.state_values
    return CeSchedule(values=rows, horizon=N)


@dataclass(frozen=True, eq=False)
class PathSpace:
    """The chain unrolled to depth N as a finite probability space of paths."""

    space: FiniteProbSpace
    states: NDArray[np.intp]
    filtration: Filtration
    payoff: RandomVariable

    def state_at(self, k: int) -> NDArray[np.intp]:
        return self.states[:, k]

    def partition_at(self, k: int) -> Partition:
        """sigma(X_0, ..., X_k); index 0 is trivial because X_0 is fixed."""
        return self.filtration.levels()[k]


def path_space(chain: MarkovChainModel, N: int) -> PathSpace:
    """Enumerate every positive-probability path of length N from the initial state."""
    if N < 1:
        raise ValidationError(f"Depth N must be at least 1, got {N}")
    paths: list[tuple[int, ...]] = [(chain.initial_state,)]
    probs: list[float] = [1.0]
    for _ in range(N):
        next_paths: list[tuple[int, ...]] = []
        next_probs: list[float] = []
        for path, p in zip(paths, probs, strict=True):
            row = chain.transition[path[-1]]
            for state in np.flatnonzero(row > 0):
                next_paths.append((*path, int(state)))
                next_probs.append(p * float(row[state]))
        if len(next_paths) > MAX_PATH_SPACE:
            raise PreconditionError(
                f"Unrolled chain exceeds {MAX_PATH_SPACE} paths at depth {N}; "
                "use the dynamic programme instead"
            )
        paths, probs = next_paths, next_probs

    states = np.array(paths, dtype=np.intp)
    weights = np.array(probs, dtype=float)
    space = FiniteProbSpace.from_probs(weights / weights.sum())
    partitions = tuple(Partition.from_labels(states[:, : k + 1]) for k in range(1, N + 1))
    payoff = RandomVariable.of(chain.state_values[states[:, N]])
    return PathSpace(space=space, states=states, filtration=Filtration(partitions), payoff=payoff)


@dataclass(frozen=True)
class ExitTimeReport:
    """P(T_L <= horizon) computed exactly and by Monte Carlo."""

    level: float
    horizon: int
    exact_prob: float
    mc_prob: float
    ci_halfwidth: float
    n_paths: int
    seed: int
    short_circuit: str | None = None

    @property
    def discrepancy(self) -> float:
        return abs(self.exact_prob - self.mc_prob)

    @property
    def agrees(self) -> bool:
        return self.discrepancy <= max(3 * self.ci_halfwidth, 1e-3)


def exit_probability(
    schedule: CeSchedule, chain: MarkovChainModel, L: float, horizon: int
) -> float:
    """P(min{k : C_k(X_k) < L} <= horizon) by forward dynamic programming."""
    _check_horizon(schedule, horizon)
    alive = np.zeros(chain.n_states, dtype=float)
    alive[chain.initial_state] = 1.0
    absorbed = 0.0
    for k in range(horizon + 1):
        breached = schedule.values[k] < L
        absorbed += float(alive[breached].sum())
        alive[breached] = 0.0
        if k < horizon:
            alive = alive @ chain.transition
    return min(max(absorbed, 0.0), 1.0)


def exit_probability_by_enumeration(
    schedule: CeSchedule, chain: MarkovChainModel, L: float, horizon: int
) -> float:
    """Same probability, summed over every state sequence of length `horizon`."""
    _check_horizon(schedule, horizon)
    if chain.n_states**horizon > MAX_ENUMERATED_PATHS:
        raise PreconditionError(
            f"{chain.n_states}^{horizon} paths exceed the enumeration limit"
        )
    P = chain.transition
    breached = schedule.values < L
    total = 0.0
    for tail in itertools.product(range(chain.n_states), repeat=horizon):
        path = (chain.initial_state, *tail)
        p = math.prod(float(P[a, b]) for a, b in itertools.pairwise(path))
        if p > 0 and any(breached[k, s] for k, s in enumerate(path)):
            total += p
    return total


def simulate_exit_probability(
    schedule: CeSchedule,
    chain: MarkovChainModel,
    L: float,
    horizon: int,
    n_paths: int,
    seed: int,
    workers: int = 1,
) -> float:
    """Monte Carlo estimate of P(T_L <= horizon) from seeded chunked path simulation."""
    _check_horizon(schedule, horizon)
    if n_paths < 1:
        raise ValidationError("n_paths must be positive")
    cumulative = np.cumsum(chain.transition, axis=1)
    breached = schedule.values < L

    def count(chunk: Chunk) -> int:
        rng = stream(seed, _EXIT_STREAM_TAG, chunk.index)
        states = np.full(chunk.size, chain.initial_state, dtype=np.intp)
        hit = np.zeros(chunk.size, dtype=bool)
        for k in range(horizon + 1):
            hit |= breached[k, states]
            if k == horizon:
                break
            draws = rng.random(chunk.size)
            states = (cumulative[states] <= draws[:, None]).sum(axis=1)
            np.minimum(states, chain.n_states - 1, out=states)
        return int(hit.sum())

    hits = run_chunks(count, chunk_ranges(n_paths), workers)
    return sum(hits) / n_paths


def exit_time_analysis(
    u: MeanFunction,
    chain: MarkovChainModel,
    N: int,
    L: float,
    n_paths: int,
    seed: int,
    horizon: int | None = None,
    workers: int = 1,
) -> ExitTimeReport:
    """Exact and simulated probability that the certainty equivalent drops below L by `horizon`.

    T_L = min{k : C_k(X_k) < L}, infinite when the level is never breached.
    """
    schedule = markov_ce_schedule(u, chain, N)
    h = N if horizon is None else horizon
    _check_horizon(schedule, h)
    if n_paths < 1:
        raise ValidationError("n_paths must be positive")

    observed = schedule.values[: h + 1]
    if L <= float(observed.min()):
        return ExitTimeReport(L, h, 0.0, 0.0, 0.0, n_paths, seed, short_circuit="below-min")
    if L > float(observed.max()):
        return ExitTimeReport(L, h, 1.0, 1.0, 0.0, n_paths, seed, short_circuit="above-max")

    exact = exit_probability(schedule, chain, L, h)
    estimate = simulate_exit_probability(schedule, chain, L, h, n_paths, seed, workers)
    halfwidth = 1.96 * math.sqrt(estimate * (1.0 - estimate) / n_paths)
    LOGGER.info("exit time L=%g h=%d exact=%.6f mc=%.6f", L, h, exact, estimate)
    return ExitTimeReport(L, h, exact, estimate, halfwidth, n_paths, seed)


def _check_horizon(schedule: CeSchedule, horizon: int) -> None:
    if not 0 <= horizon <= schedule.horizon:
        raise ValidationError(
            f"Exit horizon {horizon} must lie in 0..{schedule.horizon}"
        )
