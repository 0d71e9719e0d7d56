from __future__ import annotations

from collections.abc import Callable, Mapping

import numpy as np

from ..core.exceptions import ConfigurationError, PreconditionError
from ..core.models import (
    COMPUTED,
    CommandResult,
    ResultTable,
    scalar,
    status_of,
)
from ..core.scenario import ScenarioConfig
from ..means.functions import Convexity, MeanFunction
from ..means.points import (
    PointSet,
    WeightedDiscreteDistribution,
    distribution_f_distance_sq,
    f_mean_points,
    weighted_distribution_f_mean,
    weighted_f_distance_sq,
    weighted_f_mean,
)
from ..pricing.certainty import (
    certainty_equivalent,
    conditional_certainty_equivalent,
    pratt_premium,
    u_martingale_check,
    wealth_adjusted_ce,
)
from ..pricing.markov import exit_time_analysis, markov_ce_schedule, path_space
from ..pricing.preference import prefer, preference_consistency_check
from ..probability.conditional import (
    cond_expectation,
    f_cond_expectation,
    f_expectation,
    f_independent,
    f_moment,
    f_variance,
    jensen_order_check,
    total_variance_check,
)
from ..probability.space import Partition
from ..stats.estimators import (
    SamplerSpec,
    clt_check,
    conditional_lln_diagnostic,
    empirical_f_mean,
    f_unbiasedness_check,
    lln_diagnostic,
    sample,
)

DEFAULT_TOL = 1e-10
PREFERENCE_TOL = 1e-12


class ScenarioWorkflow:
    """Resolve a scenario and run its command."""

    def __init__(
        self, scenario: ScenarioConfig, debug: Callable[[str], None] | None = None
    ) -> None:
        self.scenario = scenario
        self.options = scenario.options
        self._debug = debug or (lambda _message: None)
        self._handlers: dict[str, Callable[[MeanFunction], CommandResult]] = {
            "mean": self._mean,
            "wmean": self._weighted_mean,
            "cond-mean": self._conditional_mean,
            "var-decomp": self._variance_decomposition,
            "prefer": self._prefer,
            "ce": self._certainty_equivalent,
            "ce-schedule": self._ce_schedule,
            "martingale-check": self._martingale_check,
            "exit-time": self._exit_time,
            "estimate": self._estimate,
            "lln": self._lln,
            "clt": self._clt,
            "jensen": self._jensen,
            "independence": self._independence,
        }

    def run(self) -> CommandResult:
        handler = self._handlers.get(self.scenario.command)
        if handler is None:
            raise ConfigurationError(f"Unknown command {self.scenario.command!r}")
        f = self.scenario.build_mean_function()
        self._debug(f"dispatching {self.scenario.command} with {f.label}")
        return handler(f)

    @property
    def tol(self) -> float:
        return self.options.tol if self.options.tol is not None else DEFAULT_TOL

    def _result(
        self,
        f: MeanFunction,
        values: Mapping[str, object],
        *tables: ResultTable,
        status: str = COMPUTED,
    ) -> CommandResult:
        return CommandResult(
            command=self.scenario.command,
            mean_function=f.label,
            status=status,
            values={key: scalar(value) for key, value in values.items()},
            tables=tables,
        )

    def _mean(self, f: MeanFunction) -> CommandResult:
        if self.options.points is None:
            raise ConfigurationError("Command 'mean' needs options.points")
        points = PointSet.from_values(self.options.points)
        m = f_mean_points(f, points)
        values: dict[str, object] = {"n_points": len(points), "dim": points.dim}
        if points.dim == 1:
            values["mean"] = m[0]
        table = ResultTable.build(
            "f-mean", ("coordinate", "value"), [(i, v) for i, v in enumerate(m)]
        )
        return self._result(f, values, table)

    def _weighted_mean(self, f: MeanFunction) -> CommandResult:
        if self.options.points is not None:
            if self.options.weights is None:
                raise ConfigurationError("Command 'wmean' with points needs options.weights")
            points = np.asarray(self.options.points, dtype=float).reshape(-1)
            m = weighted_f_mean(f, points, self.options.weights)
            objective = weighted_f_distance_sq(f, points, self.options.weights, m)
        else:
            space = self.scenario.build_space()
            X = self.scenario.variable(self.options.x)
            dist = WeightedDiscreteDistribution(
                values=X.values,
                probs=space.probs,
                weights=(
                    None
                    if self.options.atom_weights is None
                    else np.asarray(self.options.atom_weights, dtype=float)
                ),
            )
            m = weighted_distribution_f_mean(f, dist)
            objective = distribution_f_distance_sq(f, dist, m)
        return self._result(f, {"mean": m, "objective": objective})

    def _conditional_mean(self, f: MeanFunction) -> CommandResult:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        G = self.scenario.partition(self.options.partition)
        predictor = f_cond_expectation(f, space, X, G)
        classical = cond_expectation(space, X, G)
        rows = [
            (o, X.values[o], predictor.values[o], classical.values[o])
            for o in range(space.n_outcomes)
        ]
        table = ResultTable.build("conditional", ("outcome", "x", "E_f[X|G]", "E[X|G]"), rows)
        return self._result(f, {"f_expectation": f_expectation(f, space, X)}, table)

    def _variance_decomposition(self, f: MeanFunction) -> CommandResult:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        G = self.scenario.partition(self.options.partition)
        lhs, rhs = total_variance_check(f, space, X, G)
        residual = abs(lhs - rhs)
        values = {
            "f_variance": f_variance(f, space, X),
            "moment_order": self.options.moment_order,
            "f_moment": f_moment(f, space, X, self.options.moment_order),
            "lhs": lhs,
            "rhs": rhs,
            "residual": residual,
            "tol": self.tol,
        }
        return self._result(f, values, status=status_of(residual <= self.tol * max(1.0, lhs)))

    def _prefer(self, f: MeanFunction) -> CommandResult:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        Y = self.scenario.variable(self.options.y)
        tol = self.options.tol if self.options.tol is not None else PREFERENCE_TOL
        if self.options.coarse is not None or self.options.fine is not None:
            G1 = self.scenario.partition(self.options.coarse)
            G2 = self.scenario.partition(self.options.fine)
            outcome = preference_consistency_check(f, space, X, Y, G1, G2, tol)
            values: dict[str, object] = {
                "hypothesis_holds": outcome.hypothesis_holds,
                "consistent": outcome.consistent,
                "violating_blocks": ",".join(map(str, outcome.violating_blocks)),
            }
            return self._result(f, values, self._preference_table(f, G1), status=outcome.status)
        G = self.scenario.partition(self.options.partition)
        return self._result(f, {}, self._preference_table(f, G))

    def _preference_table(self, f: MeanFunction, G: Partition) -> ResultTable:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        Y = self.scenario.variable(self.options.y)
        tol = self.options.tol if self.options.tol is not None else PREFERENCE_TOL
        choices = prefer(f, space, X, Y, G, tol)
        ce_x = f_cond_expectation(f, space, X, G).values
        ce_y = f_cond_expectation(f, space, Y, G).values
        rows = [
            (index, ce_x[block[0]], ce_y[block[0]], str(choices[block[0]]))
            for index, block in enumerate(G.blocks)
        ]
        return ResultTable.build("preference", ("block", "E_u[X|G]", "E_u[Y|G]", "choice"), rows)

    def _certainty_equivalent(self, f: MeanFunction) -> CommandResult:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        values: dict[str, object] = {
            "certainty_equivalent": certainty_equivalent(f, space, X),
            "expectation": space.expectation(X.values),
        }
        tables: list[ResultTable] = []
        if self.options.partition is not None:
            G = self.scenario.partition(self.options.partition)
            ce = conditional_certainty_equivalent(f, space, X, G).values
            premium: np.ndarray | None = None
            if f.convexity is Convexity.CONCAVE:
                premium = pratt_premium(f, space, X, G).values
            rows = [
                (o, X.values[o], ce[o], None if premium is None else premium[o])
                for o in range(space.n_outcomes)
            ]
            tables.append(
                ResultTable.build("conditional", ("outcome", "x", "C(T|G)", "premium"), rows)
            )
        if self.options.wealth_now is not None or self.options.wealth_terminal is not None:
            if self.options.wealth_now is None or self.options.wealth_terminal is None:
                raise ConfigurationError("Wealth adjustment needs wealth_now and wealth_terminal")
            W_n = self.scenario.variable(self.options.wealth_now)
            W_T = self.scenario.variable(self.options.wealth_terminal)
            G = self.scenario.partition(self.options.partition)
            adjusted = wealth_adjusted_ce(f, space, W_n, W_T, X, G).values
            tables.append(
                ResultTable.build(
                    "wealth-adjusted",
                    ("outcome", "C(T|G)"),
                    [(o, adjusted[o]) for o in range(space.n_outcomes)],
                )
            )
        return self._result(f, values, *tables)

    def _ce_schedule(self, f: MeanFunction) -> CommandResult:
        chain = self.scenario.build_chain()
        N = self._require_int(self.options.N, "N")
        schedule = markov_ce_schedule(f, chain, N)
        columns = ("k", *(f"state_{s}" for s in range(chain.n_states)))
        rows = [(k, *schedule.values[k]) for k in range(N + 1)]
        values: dict[str, object] = {"horizon": N, "initial": schedule.at(0, chain.initial_state)}
        try:
            unrolled = path_space(chain, N)
        except PreconditionError as e:
            self._debug(f"skipping path-space cross-check: {e}")
        else:
            worst = 0.0
            for k in range(N + 1):
                ce = conditional_certainty_equivalent(
                    f, unrolled.space, unrolled.payoff, unrolled.partition_at(k)
                ).values
                expected = schedule.values[k, unrolled.state_at(k)]
                worst = max(worst, float(np.max(np.abs(ce - expected))))
            values["path_space_residual"] = worst
        return self._result(f, values, ResultTable.build("schedule", columns, rows))

    def _martingale_check(self, f: MeanFunction) -> CommandResult:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        report = u_martingale_check(f, space, self.scenario.build_filtration(), X, self.tol)
        rows = [(k, r) for k, r in enumerate(report.step_residuals)]
        values = {
            "certainty_equivalent": report.certainty_equivalent,
            "initial_price": report.initial_price,
            "initial_residual": report.initial_residual,
            "max_residual": report.max_residual,
            "tol": report.tol,
        }
        table = ResultTable.build("residuals", ("k", "residual"), rows)
        return self._result(f, values, table, status=status_of(report.passed))

    def _exit_time(self, f: MeanFunction) -> CommandResult:
        chain = self.scenario.build_chain()
        N = self._require_int(self.options.N, "N")
        if self.options.L is None:
            raise ConfigurationError("Command 'exit-time' needs options.L")
        report = exit_time_analysis(
            f,
            chain,
            N,
            self.options.L,
            n_paths=self.options.n_paths,
            seed=self.options.seed,
            horizon=self.options.horizon,
            workers=self.options.workers,
        )
        values = {
            "level": report.level,
            "horizon": report.horizon,
            "exact_prob": report.exact_prob,
            "mc_prob": report.mc_prob,
            "ci_halfwidth": report.ci_halfwidth,
            "n_paths": report.n_paths,
            "seed": report.seed,
            "short_circuit": report.short_circuit,
        }
        return self._result(f, values, status=status_of(report.agrees))

    def _estimate(self, f: MeanFunction) -> CommandResult:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        n = self._require_int(self.options.n, "n")
        draws = sample(SamplerSpec(space, X, self.options.seed, n))
        values: dict[str, object] = {
            "estimate": empirical_f_mean(f, draws),
            "f_expectation": f_expectation(f, space, X),
            "n": n,
            "seed": self.options.seed,
        }
        status = COMPUTED
        try:
            lhs, rhs = f_unbiasedness_check(f, space, X, n)
        except PreconditionError as e:
            self._debug(f"skipping exact unbiasedness check: {e}")
        else:
            residual = abs(lhs - rhs) / max(1.0, abs(rhs))
            values["unbiasedness_residual"] = residual
            status = status_of(residual <= self.tol)
        return self._result(f, values, status=status)

    def _lln(self, f: MeanFunction) -> CommandResult:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        checkpoints = self.options.checkpoints
        if not checkpoints:
            raise ConfigurationError("Command 'lln' needs options.checkpoints")
        if self.options.block is not None:
            G = self.scenario.partition(self.options.partition)
            report = conditional_lln_diagnostic(
                f, space, X, G, self.options.block, self.options.seed, checkpoints
            )
        else:
            n = self.options.n if self.options.n is not None else max(checkpoints)
            report = lln_diagnostic(f, SamplerSpec(space, X, self.options.seed, n), checkpoints)
        values = {
            "target": report.target,
            "sigma_f": report.sigma_f,
            "bound": report.bound,
            "final_error": report.final_error,
            "seed": self.options.seed,
        }
        table = ResultTable.build("running error", ("N", "error"), report.rows)
        return self._result(f, values, table, status=status_of(report.passed))

    def _clt(self, f: MeanFunction) -> CommandResult:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        sampler = SamplerSpec(space, X, self.options.seed, self.options.n_per_replicate)
        report = clt_check(
            f,
            sampler,
            self.options.n_replicates,
            self.options.n_per_replicate,
            workers=self.options.workers,
        )
        values = {
            "n_replicates": report.n_replicates,
            "n_per_replicate": report.n_per_replicate,
            "mu_f": report.mu_f,
            "sigma_f": report.sigma_f,
            "ks_statistic": report.ks_statistic,
            "critical_value": report.critical_value,
            "seed": self.options.seed,
        }
        table = ResultTable.build("quantiles", ("q", "z"), sorted(report.quantiles.items()))
        return self._result(f, values, table, status=status_of(report.passed))

    def _jensen(self, f: MeanFunction) -> CommandResult:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        G = self.scenario.partition(self.options.partition)
        tol = self.options.tol if self.options.tol is not None else PREFERENCE_TOL
        ordering = jensen_order_check(f, space, X, G, tol)
        f_pred, mean_pred, inverse_pred = ordering.as_triple()
        rows = [
            (o, f_pred.values[o], mean_pred.values[o], inverse_pred.values[o])
            for o in range(space.n_outcomes)
        ]
        table = ResultTable.build(
            "predictors", ("outcome", "E_f[X|G]", "E[X|G]", "E_finv[X|G]"), rows
        )
        values = {
            "convexity": str(ordering.convexity),
            "max_violation": ordering.max_violation,
        }
        return self._result(f, values, table, status=status_of(ordering.holds))

    def _independence(self, f: MeanFunction) -> CommandResult:
        space = self.scenario.build_space()
        X = self.scenario.variable(self.options.x)
        G = self.scenario.partition(self.options.partition)
        independent = f_independent(f, space, X, G, self.tol)
        values: dict[str, object] = {
            "independent": independent,
            "f_expectation": f_expectation(f, space, X),
        }
        return self._result(f, values)

    @staticmethod
    def _require_int(value: int | None, name: str) -> int:
        if value is None:
            raise ConfigurationError(f"Option {name!r} is required for this command")
        return value

