import logging
import re

import numpy as np
import pytest

from stochuc import milp
from stochuc.formulation import build_model, check_feasibility, extract_solution
from stochuc.lp import solve_lp
from stochuc.milp import (GAP_LIMIT, INFEASIBLE, NODE_LIMIT, OPTIMAL,
                          SolveOptions, brute_force_milp, solve_milp)
from stochuc.model import BINARY, GE, LE, ModelBuilder

from conftest import make_config, make_scenarios, make_unit, random_two_stage


def knapsack_model(values, weights, budget):
    b = ModelBuilder()
    for j, (v, w) in enumerate(zip(values, weights)):
        b.add_variable(f"b{j}", kind=BINARY)
        b.add_objective_term(j, -float(v))
    b.add_constraint([(j, float(w)) for j, w in enumerate(weights)], LE,
                     float(budget))
    return b.build()


class TestSolveMilp:
    def test_no_binaries_equals_lp(self):
        b = ModelBuilder()
        x = b.add_variable("x", lb=0, ub=5)
        y = b.add_variable("y", lb=0, ub=5)
        b.add_constraint([(x, 1.0), (y, 2.0)], GE, 4.0)
        b.add_objective_term(x, 1.0)
        b.add_objective_term(y, 1.5)
        model = b.build()
        res = solve_milp(model, SolveOptions(mip_gap=0.0))
        ref = solve_lp(model)
        assert res.status == OPTIMAL
        assert res.objective == pytest.approx(ref.objective, rel=1e-9)
        assert res.nodes == 1

    def test_two_unit_three_period_toy_matches_oracle(self):
        units = (make_unit(name="A", p_min=30, p_max=100, startup_cost=800,
                           shutdown_cost=400, min_up=2, min_down=1),
                 make_unit(name="B", p_min=20, p_max=80, fuel_lin=0.35,
                           startup_cost=500, shutdown_cost=250))
        config = make_config(units=units, load=(60.0, 130.0, 90.0))
        scenarios = make_scenarios(3, ((1.0, 15.0, 5.0, 5.0),))
        model, index = build_model(config, scenarios, segments=2)
        assert model.num_binaries <= 12
        res = solve_milp(model, SolveOptions(mip_gap=0.0))
        oracle = brute_force_milp(model)
        assert res.status == oracle.status == OPTIMAL
        assert res.objective == pytest.approx(
            oracle.objective, rel=1e-6)
        schedule, dispatch = extract_solution(res.x, index, config, scenarios)
        assert check_feasibility(schedule, dispatch, config, scenarios,
                                 tol=1e-6).ok

    def test_zero_load_instance_all_off(self):
        config = make_config(load=(0.0, 0.0))
        scenarios = make_scenarios(2, ((1.0, 0.0, 0.0, 0.0),))
        model, index = build_model(config, scenarios, segments=1)
        res = solve_milp(model, SolveOptions(mip_gap=0.0))
        assert res.status == OPTIMAL
        assert res.objective == pytest.approx(0.0, abs=1e-9)
        assert np.all(res.x[model.binary_indices()] == 0.0)

    def test_single_binary_picks_cheaper_fixing(self):
        b = ModelBuilder()
        z = b.add_variable("z", kind=BINARY)
        x = b.add_variable("x", lb=0, ub=10)
        # x >= 4 - 10 z ; objective x + 3 z
        b.add_constraint([(x, 1.0), (z, 10.0)], GE, 4.0)
        b.add_objective_term(x, 1.0)
        b.add_objective_term(z, 3.0)
        model = b.build()
        res = solve_milp(model, SolveOptions(mip_gap=0.0))
        lp_z0 = 4.0  # x = 4
        lp_z1 = 3.0  # x = 0, pay the fixed 3
        assert res.objective == pytest.approx(min(lp_z0, lp_z1), abs=1e-9)

    def test_infeasible_root(self):
        b = ModelBuilder()
        z = b.add_variable("z", kind=BINARY)
        b.add_constraint([(z, 1.0)], GE, 2.0)
        assert solve_milp(b.build()).status == INFEASIBLE

    def test_node_limit_status(self):
        rng = np.random.default_rng(7)
        values = rng.uniform(1, 10, 10)
        weights = rng.uniform(1, 10, 10)
        model = knapsack_model(values, weights, weights.sum() * 0.43)
        res = solve_milp(model, SolveOptions(mip_gap=0.0, node_limit=2))
        assert res.status in (NODE_LIMIT, OPTIMAL)
        if res.status == NODE_LIMIT:
            assert res.nodes <= 3

    def test_gap_limit_on_time_budget(self):
        rng = np.random.default_rng(3)
        values = rng.uniform(1, 10, 14)
        weights = rng.uniform(1, 10, 14)
        model = knapsack_model(values, weights, weights.sum() * 0.37)
        res = solve_milp(model, SolveOptions(mip_gap=0.0, time_limit=0.0))
        assert res.status in (GAP_LIMIT, OPTIMAL)

    def test_options_validation(self):
        with pytest.raises(ValueError):
            SolveOptions(mip_gap=-1.0)
        with pytest.raises(ValueError):
            SolveOptions(branching="steepest")


class TestInvariants:
    def test_child_bounds_monotone_and_incumbent_non_increasing(self):
        events = []

        def record(parent_bound, objective, incumbent):
            events.append((parent_bound, objective, incumbent))

        rng = np.random.default_rng(12)
        values = rng.uniform(1, 9, 11)
        weights = rng.uniform(1, 9, 11)
        model = knapsack_model(values, weights, weights.sum() * 0.41)
        solve_milp(model, SolveOptions(mip_gap=0.0, node_callback=record))
        incumbents = []
        for parent_bound, objective, incumbent in events:
            if np.isfinite(parent_bound):
                assert objective >= parent_bound - 1e-9 * max(1, abs(parent_bound))
            incumbents.append(incumbent)
        finite = [v for v in incumbents if np.isfinite(v)]
        assert all(b <= a + 1e-12 for a, b in zip(finite, finite[1:]))

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_brute_force_on_random_two_stage(self, seed):
        rng = np.random.default_rng(1000 + seed)
        config, scenarios = random_two_stage(rng)
        model, index = build_model(config, scenarios,
                                   segments=int(rng.integers(1, 3)))
        res = solve_milp(model, SolveOptions(mip_gap=0.0))
        oracle = brute_force_milp(model)
        assert res.status == oracle.status
        if res.status == OPTIMAL:
            assert res.objective == pytest.approx(
                oracle.objective, rel=1e-6, abs=1e-6)
            assert res.gap <= 1e-9

    def test_deterministic_and_thread_invariant(self):
        solved = 0
        for seed in (77, 78, 79, 80):
            rng = np.random.default_rng(seed)
            config, scenarios = random_two_stage(rng)
            model, _ = build_model(config, scenarios, segments=2)
            first = solve_milp(model, SolveOptions(mip_gap=0.0))
            again = solve_milp(model, SolveOptions(mip_gap=0.0))
            threaded = solve_milp(model, SolveOptions(mip_gap=0.0, threads=4))
            assert first.status == again.status == threaded.status
            assert first.nodes == again.nodes
            if first.x is None:
                continue
            solved += 1
            assert first.objective == again.objective
            assert threaded.objective == first.objective  # exact, not approximate
            assert np.array_equal(first.x, again.x)
            assert np.array_equal(threaded.x[model.binary_indices()],
                                  first.x[model.binary_indices()])
        assert solved >= 2

    def test_warm_start_off_gives_same_objective(self):
        rng = np.random.default_rng(5)
        config, scenarios = random_two_stage(rng)
        model, _ = build_model(config, scenarios, segments=2)
        warm = solve_milp(model, SolveOptions(mip_gap=0.0))
        cold = solve_milp(model, SolveOptions(mip_gap=0.0, warm_start=False))
        assert warm.status == cold.status
        if warm.status == OPTIMAL:
            assert warm.objective == pytest.approx(cold.objective, rel=1e-8)

    def test_progress_log_line_format(self, caplog):
        pattern = re.compile(
            r"nodes=\d+ incumbent=\S+ bound=\S+ gap=\S+")
        rng = np.random.default_rng(2)
        values = rng.uniform(1, 9, 8)
        weights = rng.uniform(1, 9, 8)
        model = knapsack_model(values, weights, weights.sum() * 0.44)
        with caplog.at_level(logging.INFO, logger="stochuc.milp"):
            solve_milp(model, SolveOptions(mip_gap=0.0))
        lines = [r.getMessage() for r in caplog.records]
        assert lines and all(pattern.fullmatch(line) for line in lines)


class TestBruteForce:
    def test_zero_binaries_single_solve(self):
        b = ModelBuilder()
        x = b.add_variable("x", lb=1, ub=4)
        b.add_objective_term(x, 2.0)
        res = brute_force_milp(b.build())
        assert res.status == OPTIMAL
        assert res.objective == pytest.approx(2.0)
        assert res.nodes == 1

    def test_one_binary_min_of_two(self):
        b = ModelBuilder()
        z = b.add_variable("z", kind=BINARY)
        x = b.add_variable("x", lb=0, ub=10)
        b.add_constraint([(x, 1.0), (z, 10.0)], GE, 4.0)
        b.add_objective_term(x, 1.0)
        b.add_objective_term(z, 3.0)
        res = brute_force_milp(b.build())
        assert res.nodes == 2
        assert res.objective == pytest.approx(3.0)

    def test_binary_budget_enforced(self):
        b = ModelBuilder()
        for j in range(5):
            b.add_variable(f"b{j}", kind=BINARY)
        with pytest.raises(ValueError):
            brute_force_milp(b.build(), max_binaries=4)
