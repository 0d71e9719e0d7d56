from __future__ import annotations

import math
from typing import Any

import pytest

from fmean.core.exceptions import ConfigurationError
from fmean.core.models import CommandResult
from fmean.core.scenario import ScenarioConfig
from fmean.workflows.scenario_workflow import ScenarioWorkflow

SPACE: dict[str, Any] = {
    "space": {"probs": [0.25, 0.25, 0.25, 0.25]},
    "variables": {"X": [1, 4, 9, 16], "Y": [4, 4, 4, 4], "W": [1, 1, 1, 1]},
    "partitions": {"G": [[0, 1], [2, 3]], "T": [[0, 1, 2, 3]], "S": [[0], [1], [2], [3]]},
}
CHAIN: dict[str, Any] = {
    "chain": {
        "transition": [[0.7, 0.2, 0.1], [0.3, 0.4, 0.3], [0.1, 0.3, 0.6]],
        "state_values": [0.5, 1.0, 2.0],
    }
}


def _run(
    command: str, options: dict[str, Any], *, name: str = "log", **sections: Any
) -> CommandResult:
    payload = {
        "mean_function": {"name": name},
        "command": command,
        **SPACE,
        **sections,
        "options": options,
    }
    return ScenarioWorkflow(ScenarioConfig.from_mapping(payload)).run()


def test_mean_of_points() -> None:
    result = _run("mean", {"points": [1, 4]})

    assert result.status == "OK"
    assert result.values["mean"] == pytest.approx(2.0)
    assert result.values["dim"] == 1


def test_mean_of_vectors_reports_coordinates() -> None:
    result = _run("mean", {"points": [[1, 2], [4, 8]]})

    assert "mean" not in result.values
    assert [row[1] for row in result.tables[0].rows] == pytest.approx([2.0, 4.0])


def test_mean_needs_points() -> None:
    with pytest.raises(ConfigurationError, match="options.points"):
        _run("mean", {})


def test_weighted_mean_of_points_and_of_a_distribution() -> None:
    points = _run("wmean", {"points": [1, math.e**4], "weights": [3, 1]})
    distribution = _run("wmean", {"atom_weights": [1, 1, 1, 1]})

    assert points.values["mean"] == pytest.approx(math.e)
    assert distribution.values["mean"] == pytest.approx(math.sqrt(24.0))


def test_conditional_mean_table() -> None:
    result = _run("cond-mean", {"partition": "G"})

    rows = result.tables[0].rows
    assert [row[2] for row in rows] == pytest.approx([2.0, 2.0, 12.0, 12.0])
    assert [row[3] for row in rows] == pytest.approx([2.5, 2.5, 12.5, 12.5])


def test_variance_decomposition_passes() -> None:
    result = _run("var-decomp", {"partition": "G"}, name="identity")

    assert result.status == "PASS"
    assert result.values["lhs"] == pytest.approx(32.25)
    assert result.values["moment_order"] == 2.0
    assert result.values["f_moment"] == pytest.approx(88.5)


def test_variance_decomposition_reports_the_requested_moment() -> None:
    result = _run("var-decomp", {"partition": "G", "moment_order": 1})

    assert result.values["f_moment"] == pytest.approx(math.log(576.0) / 4)


def test_moment_order_below_one_is_rejected() -> None:
    with pytest.raises(ConfigurationError, match="moment_order"):
        _run("var-decomp", {"partition": "G", "moment_order": 0.5})


def test_prefer_lists_block_choices() -> None:
    result = _run("prefer", {"partition": "G"})

    assert [row[3] for row in result.tables[0].rows] == ["Y_preferred", "X_preferred"]


def test_prefer_consistency_reports_hypothesis_failure() -> None:
    result = _run("prefer", {"coarse": "T", "fine": "G"})

    assert result.status == "HYPOTHESIS-FAILED"
    assert not result.failed


def test_prefer_consistency_passes_when_fine_preference_holds() -> None:
    result = _run("prefer", {"x": "W", "y": "X", "coarse": "T", "fine": "G"})

    assert result.status == "PASS"


def test_certainty_equivalent_with_premium_and_wealth() -> None:
    result = _run(
        "ce",
        {"partition": "G", "wealth_now": "W", "wealth_terminal": "W"},
    )

    assert result.values["certainty_equivalent"] == pytest.approx(math.sqrt(24.0))
    assert result.values["expectation"] == pytest.approx(7.5)
    conditional, wealth = result.tables
    assert [row[3] for row in conditional.rows] == pytest.approx([0.5, 0.5, 0.5, 0.5])
    assert [row[1] for row in wealth.rows] == pytest.approx(
        [math.sqrt(10.0) - 1, math.sqrt(10.0) - 1, math.sqrt(170.0) - 1, math.sqrt(170.0) - 1]
    )


def test_certainty_equivalent_skips_premium_for_non_concave_utility() -> None:
    result = _run("ce", {"partition": "G"}, name="cube")

    assert all(row[3] is None for row in result.tables[0].rows)


def test_wealth_adjustment_needs_both_wealth_variables() -> None:
    with pytest.raises(ConfigurationError, match="wealth_now and wealth_terminal"):
        _run("ce", {"partition": "G", "wealth_now": "W"})


def test_ce_schedule_cross_checks_the_path_space() -> None:
    result = _run("ce-schedule", {"N": 3}, **CHAIN)

    assert len(result.tables[0].rows) == 4
    assert result.tables[0].rows[-1][1:] == (0.5, 1.0, 2.0)
    assert result.values["path_space_residual"] <= 1e-10


def test_ce_schedule_needs_a_horizon() -> None:
    with pytest.raises(ConfigurationError, match="'N'"):
        _run("ce-schedule", {}, **CHAIN)


def test_martingale_check_passes() -> None:
    result = _run("martingale-check", {}, filtration=["G", "S"])

    assert result.status == "PASS"
    assert result.values["initial_price"] == pytest.approx(math.sqrt(24.0))


def test_exit_time_agrees_with_simulation() -> None:
    result = _run("exit-time", {"N": 4, "L": 0.9, "n_paths": 20_000, "seed": 5}, **CHAIN)

    assert result.status == "PASS"
    assert result.values["seed"] == 5
    assert result.values["short_circuit"] is None


def test_estimate_checks_unbiasedness_when_enumerable() -> None:
    small = _run("estimate", {"n": 3, "seed": 1})
    large = _run("estimate", {"n": 50, "seed": 1})

    assert small.status == "PASS"
    assert small.values["unbiasedness_residual"] <= 1e-10
    assert large.status == "OK"
    assert "unbiasedness_residual" not in large.values


def test_lln_reports_running_errors() -> None:
    result = _run("lln", {"checkpoints": [100, 10_000, 100_000], "seed": 3})

    assert result.status == "PASS"
    assert [row[0] for row in result.tables[0].rows] == [100, 10_000, 100_000]


def test_conditional_lln_uses_the_block() -> None:
    result = _run("lln", {"checkpoints": [100, 50_000], "partition": "G", "block": 1, "seed": 3})

    assert result.values["target"] == pytest.approx(12.0)


def test_lln_needs_checkpoints() -> None:
    with pytest.raises(ConfigurationError, match="checkpoints"):
        _run("lln", {})


def test_clt_reports_quantiles() -> None:
    result = _run(
        "clt",
        {"n_replicates": 2_000, "n_per_replicate": 200, "seed": 4},
        name="identity",
        variables={"X": [0.3, 1.0, math.e, 2.0]},
    )

    assert result.status == "PASS"
    assert [row[0] for row in result.tables[0].rows] == [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99]


def test_jensen_ordering_holds_for_log() -> None:
    result = _run("jensen", {"partition": "G"})

    assert result.status == "PASS"
    assert result.values["convexity"] == "concave"


def test_independence_on_a_product_space() -> None:
    result = _run(
        "independence",
        {"partition": "first"},
        space={"probs": [0.12, 0.18, 0.28, 0.42]},
        variables={"X": [2.0, 5.0, 2.0, 5.0]},
        partitions={"first": [[0, 1], [2, 3]]},
    )

    assert result.values["independent"] is True
