from __future__ import annotations

import math

import numpy as np
import pytest

from fmean.core.exceptions import PreconditionError, ValidationError
from fmean.means.functions import make_mean_function
from fmean.pricing.certainty import (
    AdaptedProcess,
    Filtration,
    certainty_equivalent,
    conditional_certainty_equivalent,
    pratt_premium,
    u_martingale_check,
    wealth_adjusted_ce,
)
from fmean.pricing.preference import Preference, prefer, preference_consistency_check
from fmean.probability.conditional import cond_expectation
from fmean.probability.space import FiniteProbSpace, Partition, RandomVariable
from tests.conftest import CATALOG_CASES

CONCAVE_CASES = [("log", ()), ("power", (0.5,)), ("cara", (1.0,)), ("neg_inverse", ())]


def _nested_filtration(rng: np.random.Generator, n: int, m: int) -> Filtration:
    """m partitions of n outcomes, each a refinement of the previous one."""
    labels = np.zeros(n, dtype=np.int64)
    partitions: list[Partition] = []
    for _ in range(m):
        labels = labels * 3 + rng.integers(0, 3, size=n)
        partitions.append(Partition.from_labels(labels))
    return Filtration(tuple(partitions))


def test_prefer_is_indifferent_between_equal_payoffs(
    uniform4: FiniteProbSpace, squares: RandomVariable, halves: Partition
) -> None:
    choices = prefer(make_mean_function("log"), uniform4, squares, squares, halves)

    assert set(choices) == {Preference.INDIFFERENT}


def test_prefer_respects_pointwise_dominance(uniform4: FiniteProbSpace, halves: Partition) -> None:
    X = uniform4.variable([1.0, 2.0, 3.0, 4.0])
    Y = uniform4.variable([1.0, 2.5, 3.0, 4.0])

    choices = prefer(make_mean_function("log"), uniform4, X, Y, halves)

    assert choices == (
        Preference.Y_PREFERRED,
        Preference.Y_PREFERRED,
        Preference.INDIFFERENT,
        Preference.INDIFFERENT,
    )


def test_prefer_compares_blockwise_geometric_means(
    uniform4: FiniteProbSpace, halves: Partition
) -> None:
    X = uniform4.variable([1.0, 1.0, 9.0, 9.0])
    Y = uniform4.variable([4.0, 4.0, 4.0, 4.0])

    choices = prefer(make_mean_function("log"), uniform4, X, Y, halves)

    assert [str(c) for c in choices] == ["Y_preferred", "Y_preferred", "X_preferred", "X_preferred"]


def test_preference_survives_coarsening_to_trivial(uniform4: FiniteProbSpace) -> None:
    X = uniform4.variable([1.0, 2.0, 3.0, 4.0])
    Y = uniform4.variable([2.0, 2.0, 5.0, 4.0])

    outcome = preference_consistency_check(
        make_mean_function("log"), uniform4, X, Y, Partition.trivial(4), Partition.singletons(4)
    )

    assert outcome.passed
    assert outcome.status == "PASS"


def test_preference_consistency_with_equal_payoffs(
    uniform4: FiniteProbSpace, squares: RandomVariable, halves: Partition
) -> None:
    outcome = preference_consistency_check(
        make_mean_function("log"), uniform4, squares, squares, Partition.trivial(4), halves
    )

    assert outcome.passed


def test_preference_consistency_reports_failed_hypothesis(
    uniform4: FiniteProbSpace, halves: Partition
) -> None:
    X = uniform4.variable([1.0, 1.0, 9.0, 9.0])
    Y = uniform4.variable([4.0] * 4)

    outcome = preference_consistency_check(
        make_mean_function("log"), uniform4, X, Y, Partition.trivial(4), halves
    )

    assert not outcome.hypothesis_holds
    assert outcome.status == "HYPOTHESIS-FAILED"


def test_preference_consistency_requires_refinement(
    uniform4: FiniteProbSpace, squares: RandomVariable, halves: Partition
) -> None:
    with pytest.raises(ValidationError, match="refine"):
        preference_consistency_check(
            make_mean_function("log"), uniform4, squares, squares, halves, Partition.trivial(4)
        )


def test_preference_consistency_on_random_instances() -> None:
    rng = np.random.default_rng(21)
    checked = 0
    for index in range(400):
        name, params, low, high = CATALOG_CASES[index % len(CATALOG_CASES)]
        u = make_mean_function(name, params)
        n = int(rng.integers(2, 9))
        space = FiniteProbSpace.from_probs(rng.dirichlet(np.ones(n)))
        X = space.variable(rng.uniform(low, high, size=n))
        Y = space.variable(np.minimum(X.values + rng.uniform(-0.1, 0.5, size=n), high))
        filtration = _nested_filtration(rng, n, 2)
        G1, G2 = filtration.partitions

        outcome = preference_consistency_check(u, space, X, Y, G1, G2)

        if outcome.hypothesis_holds:
            checked += 1
            assert outcome.consistent, u.label
    assert checked > 0


def test_certainty_equivalent_examples() -> None:
    two = FiniteProbSpace.uniform(2)
    X = two.variable([1.0, 4.0])

    assert certainty_equivalent(make_mean_function("identity"), two, X) == pytest.approx(2.5)
    assert certainty_equivalent(make_mean_function("log"), two, X) == pytest.approx(2.0)
    assert certainty_equivalent(make_mean_function("cara", [0.7]), two, X) == pytest.approx(
        -math.log(0.5 * math.exp(-0.7) + 0.5 * math.exp(-2.8)) / 0.7
    )


def test_conditional_certainty_equivalent_examples(
    uniform4: FiniteProbSpace, squares: RandomVariable, halves: Partition
) -> None:
    log = make_mean_function("log")

    assert conditional_certainty_equivalent(log, uniform4, squares, halves).values == (
        pytest.approx([2.0, 2.0, 12.0, 12.0])
    )
    assert conditional_certainty_equivalent(
        log, uniform4, squares, Partition.singletons(4)
    ).values == pytest.approx(squares.values)
    assert conditional_certainty_equivalent(
        log, uniform4, squares, Partition.trivial(4)
    ).values == pytest.approx([certainty_equivalent(log, uniform4, squares)] * 4)


def test_pratt_premium_examples(
    uniform4: FiniteProbSpace, squares: RandomVariable
) -> None:
    log = make_mean_function("log")
    two = FiniteProbSpace.uniform(2)

    assert pratt_premium(
        log, two, two.variable([1.0, 4.0]), Partition.trivial(2)
    ).values == pytest.approx([0.5, 0.5])
    assert pratt_premium(
        log, uniform4, uniform4.variable([3.0] * 4), Partition.trivial(4)
    ).values == pytest.approx([0.0] * 4, abs=1e-12)
    assert pratt_premium(log, uniform4, squares, Partition.singletons(4)).values == (
        pytest.approx([0.0] * 4, abs=1e-12)
    )


def test_pratt_premium_requires_concave_utility(
    uniform4: FiniteProbSpace, squares: RandomVariable, halves: Partition
) -> None:
    with pytest.raises(PreconditionError, match="concave"):
        pratt_premium(make_mean_function("exp", [1.0]), uniform4, squares, halves)


def test_pratt_premium_is_non_negative_on_random_instances() -> None:
    rng = np.random.default_rng(22)
    for index in range(300):
        name, params = CONCAVE_CASES[index % len(CONCAVE_CASES)]
        u = make_mean_function(name, params)
        n = int(rng.integers(1, 10))
        space = FiniteProbSpace.from_probs(rng.dirichlet(np.ones(n)))
        X = space.variable(rng.uniform(0.2, 3.0, size=n))
        G = Partition.from_labels(rng.integers(0, 3, size=n))

        assert np.all(pratt_premium(u, space, X, G).values >= -1e-12), u.label


def test_conditional_ce_meets_the_mean_only_on_constant_blocks() -> None:
    rng = np.random.default_rng(23)
    for index in range(300):
        name, params = CONCAVE_CASES[index % len(CONCAVE_CASES)]
        u = make_mean_function(name, params)
        n = int(rng.integers(2, 11))
        space = FiniteProbSpace.from_probs(rng.dirichlet(np.ones(n)))
        G = Partition.from_labels(rng.integers(0, 3, size=n))
        values = rng.uniform(0.2, 3.0, size=n)
        n_flat = int(rng.integers(0, G.n_blocks + 1))
        for b in rng.choice(G.n_blocks, size=n_flat, replace=False):
            block = list(G.blocks[int(b)])
            values[block] = values[block[0]]
        X_T = space.variable(values)

        ce = conditional_certainty_equivalent(u, space, X_T, G).values
        mean = cond_expectation(space, X_T, G).values

        for block in G.blocks:
            first = block[0]
            gap = mean[first] - ce[first]
            if np.ptp(values[list(block)]) == 0:
                assert abs(gap) <= 1e-12 * max(1.0, mean[first]), (u.label, block)
            else:
                assert gap > 0, (u.label, block)


def test_martingale_check_on_binary_tree(
    uniform4: FiniteProbSpace, squares: RandomVariable, halves: Partition
) -> None:
    filtration = Filtration((halves, Partition.singletons(4)))

    report = u_martingale_check(make_mean_function("log"), uniform4, filtration, squares)

    assert report.passed
    assert report.max_residual <= 1e-10
    assert report.initial_price == pytest.approx(math.sqrt(24.0))
    assert report.certainty_equivalent == pytest.approx(math.sqrt(24.0))
    assert report.prices[1].values == pytest.approx([2.0, 2.0, 12.0, 12.0])


def test_martingale_check_with_identity_is_classical(
    uniform4: FiniteProbSpace, squares: RandomVariable, halves: Partition
) -> None:
    report = u_martingale_check(
        make_mean_function("identity"), uniform4, Filtration((halves,)), squares
    )

    assert report.passed
    assert np.array_equal(
        report.prices[1].values, cond_expectation(uniform4, squares, halves).values
    )


def test_martingale_check_on_random_filtrations() -> None:
    rng = np.random.default_rng(23)
    for index in range(1000):
        name, params, low, high = CATALOG_CASES[index % len(CATALOG_CASES)]
        u = make_mean_function(name, params)
        n = int(rng.integers(1, 13))
        space = FiniteProbSpace.from_probs(rng.dirichlet(np.ones(n)))
        X_T = space.variable(rng.uniform(low, high, size=n))
        filtration = _nested_filtration(rng, n, int(rng.integers(1, 4)))

        report = u_martingale_check(u, space, filtration, X_T)

        assert report.passed, (u.label, report.step_residuals, report.initial_residual)


def test_filtration_must_be_increasing(halves: Partition) -> None:
    with pytest.raises(ValidationError, match="does not refine"):
        Filtration((Partition.singletons(4), halves))


def test_natural_filtration(uniform4: FiniteProbSpace) -> None:
    X1 = uniform4.variable([0, 0, 1, 1])
    X2 = uniform4.variable([0, 1, 0, 0])

    filtration = Filtration.natural(uniform4, [X1, X2])

    assert filtration.m == 2
    assert filtration.partitions[0].blocks == ((0, 1), (2, 3))
    assert filtration.partitions[1].blocks == ((0,), (1,), (2, 3))
    assert filtration.levels()[0].blocks == ((0, 1, 2, 3),)


def test_adapted_process_requires_measurability(halves: Partition) -> None:
    with pytest.raises(ValidationError, match="not measurable"):
        AdaptedProcess((RandomVariable.of([1.0, 2.0, 3.0, 3.0]),), (halves,))


def test_wealth_adjusted_ce_examples(uniform4: FiniteProbSpace, halves: Partition) -> None:
    two = FiniteProbSpace.uniform(2)
    ones = two.variable([1.0, 1.0])
    trivial = Partition.trivial(2)

    assert wealth_adjusted_ce(
        make_mean_function("log"), two, ones, ones, two.variable([0.0, 3.0]), trivial
    ).values == pytest.approx([1.0, 1.0])
    assert wealth_adjusted_ce(
        make_mean_function("log"), two, ones, ones, two.variable([0.0, 0.0]), trivial
    ).values == pytest.approx([0.0, 0.0], abs=1e-15)

    W_n = uniform4.variable([2.0, 2.0, 5.0, 5.0])
    W_T = uniform4.variable([3.0, 1.0, 6.0, 4.0])
    X_T = uniform4.variable([1.0, 2.0, 0.5, 0.5])
    linear = wealth_adjusted_ce(make_mean_function("identity"), uniform4, W_n, W_T, X_T, halves)
    expected = cond_expectation(uniform4, W_T + X_T, halves).values - W_n.values
    assert linear.values == pytest.approx(expected)


def test_wealth_adjusted_ce_requires_known_current_wealth(
    uniform4: FiniteProbSpace, squares: RandomVariable, halves: Partition
) -> None:
    with pytest.raises(ValidationError, match="constant on the blocks"):
        wealth_adjusted_ce(
            make_mean_function("log"), uniform4, squares, squares, squares, halves
        )
