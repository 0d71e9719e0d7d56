from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmean.core.exceptions import ValidationError
from fmean.means.functions import make_mean_function
from fmean.means.points import (
    PointSet,
    WeightedDiscreteDistribution,
    distribution_f_distance_sq,
    f_distance,
    f_mean_points,
    weighted_distribution_f_mean,
    weighted_f_distance_sq,
    weighted_f_mean,
)

POSITIVE = st.floats(0.1, 50.0)


def test_f_distance_examples() -> None:
    assert f_distance(make_mean_function("identity"), (1, 2), (4, 6)) == pytest.approx(5.0)
    assert f_distance(make_mean_function("log"), (1,), (math.e**2,)) == pytest.approx(2.0)
    assert f_distance(make_mean_function("log"), (3.0, 7.0), (3.0, 7.0)) == 0.0


def test_f_distance_rejects_dimension_mismatch() -> None:
    with pytest.raises(ValidationError, match="Dimension mismatch"):
        f_distance(make_mean_function("identity"), (1, 2), (1, 2, 3))


def test_f_mean_points_examples() -> None:
    assert f_mean_points(make_mean_function("log"), PointSet.from_values([1, 4]))[0] == (
        pytest.approx(2.0)
    )
    assert f_mean_points(
        make_mean_function("neg_inverse"), PointSet.from_values([2, 6])
    )[0] == pytest.approx(3.0)
    assert f_mean_points(
        make_mean_function("identity"), PointSet.from_values([1, 2, 6])
    )[0] == pytest.approx(3.0)


def test_f_mean_points_is_componentwise() -> None:
    pts = PointSet.from_values([[1.0, 2.0], [4.0, 8.0]])

    m = f_mean_points(make_mean_function("log"), pts)

    assert pts.dim == 2
    assert m == pytest.approx([2.0, 4.0])


def test_point_set_needs_points() -> None:
    with pytest.raises(ValidationError):
        PointSet.from_values(np.empty((0, 2)))


def test_weighted_f_mean_examples() -> None:
    identity = make_mean_function("identity")
    log = make_mean_function("log")

    assert weighted_f_mean(identity, [1, 3], [1, 1]) == pytest.approx(2.0)
    assert weighted_f_mean(log, [1, 4], [2, 2]) == pytest.approx(2.0)
    assert weighted_f_mean(log, [1, math.e**4], [3, 1]) == pytest.approx(math.e)


def test_weighted_f_mean_rejects_bad_weights() -> None:
    identity = make_mean_function("identity")

    with pytest.raises(ValidationError):
        weighted_f_mean(identity, [1, 2], [1])
    with pytest.raises(ValidationError):
        weighted_f_mean(identity, [1, 2], [1, -1])


def test_weighted_distribution_f_mean_examples() -> None:
    identity = make_mean_function("identity")
    log = make_mean_function("log")

    single = WeightedDiscreteDistribution.from_atoms([(2.5, 1.0)])
    plain = WeightedDiscreteDistribution.from_atoms([(0.0, 0.5), (2.0, 0.5)])
    weighted = WeightedDiscreteDistribution.from_atoms([(1.0, 0.5), (4.0, 0.5)], weights=[1, 3])

    assert weighted_distribution_f_mean(log, single) == pytest.approx(2.5)
    assert weighted_distribution_f_mean(identity, plain) == pytest.approx(1.0)
    assert weighted_distribution_f_mean(log, weighted) == pytest.approx(4**0.75)


def test_distribution_rejects_probabilities_not_summing_to_one() -> None:
    with pytest.raises(ValidationError, match="sum"):
        WeightedDiscreteDistribution.from_atoms([(1.0, 0.5), (2.0, 0.4)])


def test_weighted_objectives_are_minimised_at_the_weighted_mean() -> None:
    log = make_mean_function("log")
    values, weights = [1.0, 2.0, 5.0], [0.2, 1.0, 3.0]
    m = weighted_f_mean(log, values, weights)
    dist = WeightedDiscreteDistribution.from_atoms(
        [(1.0, 0.25), (2.0, 0.25), (5.0, 0.5)], weights=[2.0, 1.0, 0.5]
    )
    md = weighted_distribution_f_mean(log, dist)

    for step in (-1e-3, 1e-3):
        assert weighted_f_distance_sq(log, values, weights, m) <= weighted_f_distance_sq(
            log, values, weights, m + step
        )
        assert distribution_f_distance_sq(log, dist, md) <= distribution_f_distance_sq(
            log, dist, md + step
        )


@settings(max_examples=200)
@given(
    x=st.lists(POSITIVE, min_size=3, max_size=3),
    y=st.lists(POSITIVE, min_size=3, max_size=3),
    z=st.lists(POSITIVE, min_size=3, max_size=3),
)
def test_f_distance_is_a_metric(x: list[float], y: list[float], z: list[float]) -> None:
    for f in (make_mean_function("log"), make_mean_function("power", [0.5])):
        dxy = f_distance(f, x, y)
        assert dxy >= 0.0
        assert dxy == pytest.approx(f_distance(f, y, x))
        assert f_distance(f, x, x) == 0.0
        assert dxy <= f_distance(f, x, z) + f_distance(f, z, y) + 1e-9


def test_f_mean_points_minimises_the_sum_of_squared_f_distances() -> None:
    rng = np.random.default_rng(20240611)
    cases = [
        make_mean_function("identity"),
        make_mean_function("log"),
        make_mean_function("power", [2.0]),
        make_mean_function("exp", [1.0]),
    ]
    offsets = [np.array(step) for step in itertools.product((-1e-4, 0.0, 1e-4), repeat=3)]

    for instance in range(200):
        f = cases[instance % len(cases)]
        n, d = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        pts = PointSet.from_values(rng.uniform(0.5, 3.0, size=(n, d)))
        m = f_mean_points(f, pts)

        def objective(z: np.ndarray, f=f, pts=pts) -> float:
            return sum(f_distance(f, row, z) ** 2 for row in pts.points)

        best = objective(m)
        for offset in offsets:
            assert best <= objective(m + offset[:d]) + 1e-12
        for _ in range(5):
            assert best <= objective(m + rng.normal(scale=1e-2, size=d)) + 1e-12
