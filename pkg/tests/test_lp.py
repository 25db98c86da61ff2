import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochuc.lp import (INFEASIBLE, OPTIMAL, UNBOUNDED, LPWorkspace,
                        dual_objective, solve_lp, solve_prepared, verify_lp)
from stochuc.model import EQ, GE, LE, ModelBuilder, write_lp_text

import oracles


def single_var_model():
    b = ModelBuilder()
    x = b.add_variable("x", lb=-np.inf, ub=np.inf)
    b.add_constraint([(x, 1.0)], GE, 3.0)
    b.add_constraint([(x, 1.0)], LE, 10.0)
    b.add_objective_term(x, 1.0)
    return b.build()


def two_var_model():
    b = ModelBuilder()
    x = b.add_variable("x", lb=0, ub=3)
    y = b.add_variable("y", lb=0, ub=3)
    b.add_constraint([(x, 1.0), (y, 1.0)], LE, 4.0)
    b.add_objective_term(x, -1.0)
    b.add_objective_term(y, -1.0)
    return b.build()


def random_bounded_model(rng, n_max=50, m_max=30):
    """Feasible-by-construction bounded random LP."""
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    b = ModelBuilder()
    x0 = np.empty(n)
    for j in range(n):
        lo, hi = sorted(rng.normal(0, 5, 2))
        hi = max(hi, lo + 0.1)
        b.add_variable(f"x{j}", lb=lo, ub=hi)
        b.add_objective_term(j, rng.normal(0, 2))
        x0[j] = rng.uniform(lo, hi)
    for _ in range(m):
        nnz = int(rng.integers(1, min(n, 5) + 1))
        cols = rng.choice(n, size=nnz, replace=False)
        coeffs = [(int(c), float(rng.normal(0, 2))) for c in cols]
        act = sum(v * x0[c] for c, v in coeffs)
        sense = [LE, GE, EQ][int(rng.integers(0, 3))]
        slack = abs(rng.normal(0, 2))
        rhs = act + slack if sense == LE else act - slack if sense == GE else act
        b.add_constraint(coeffs, sense, rhs)
    return b.build()


class TestSolveLP:
    def test_single_active_bound(self):
        res = solve_lp(single_var_model())
        assert res.status == OPTIMAL
        assert res.objective == pytest.approx(3.0, abs=1e-9)

    def test_two_var_vertex(self):
        model = two_var_model()
        res = solve_lp(model)
        assert res.status == OPTIMAL
        assert res.objective == pytest.approx(-4.0, abs=1e-9)
        # the optimum value is confirmed by vertex enumeration
        assert oracles.vertex_optimum(model) == pytest.approx(-4.0, abs=1e-9)
        assert res.x[0] + res.x[1] == pytest.approx(4.0, abs=1e-8)

    def test_empty_polytope(self):
        b = ModelBuilder()
        x = b.add_variable("x", lb=-np.inf, ub=np.inf)
        b.add_constraint([(x, 1.0)], GE, 1.0)
        b.add_constraint([(x, 1.0)], LE, 0.0)
        assert solve_lp(b.build()).status == INFEASIBLE

    def test_unbounded_ray(self):
        b = ModelBuilder()
        x = b.add_variable("x")
        b.add_objective_term(x, -1.0)
        assert solve_lp(b.build()).status == UNBOUNDED

    def test_equality_handled_via_phase1(self):
        b = ModelBuilder()
        x = b.add_variable("x", lb=0, ub=2)
        y = b.add_variable("y", lb=0, ub=10)
        b.add_constraint([(x, 1.0), (y, 1.0)], EQ, 5.0)
        b.add_objective_term(x, 1.0)
        b.add_objective_term(y, 3.0)
        res = solve_lp(b.build())
        assert res.status == OPTIMAL
        assert res.objective == pytest.approx(11.0, abs=1e-8)

    def test_iteration_log_stream(self):
        rng = np.random.default_rng(0)
        model = random_bounded_model(rng, n_max=40, m_max=25)
        seen = []
        solve_lp(model, log=seen.append)
        # the log callback may or may not fire on tiny instances, but when it
        # does, entries carry the iteration counter
        for entry in seen:
            assert "iteration" in entry


class TestVerifyLP:
    def test_optimal_result_verifies(self):
        model = two_var_model()
        res = solve_lp(model)
        assert verify_lp(model, res, 1e-6) is True

    def test_perturbed_primal_fails(self):
        model = two_var_model()
        res = solve_lp(model)
        bad = res.x.copy()
        bad[0] += 1.0  # crosses x + y <= 4
        from dataclasses import replace
        assert verify_lp(model, replace(res, x=bad), 1e-6) is False

    def test_hand_computed_optimum_verifies(self):
        model = two_var_model()
        res = solve_lp(model)
        assert res.objective == pytest.approx(oracles.vertex_optimum(model), abs=1e-9)
        assert verify_lp(model, res, 1e-6)

    def test_rejects_non_optimal_result(self):
        b = ModelBuilder()
        x = b.add_variable("x")
        b.add_constraint([(x, 1.0)], GE, 1.0)
        b.add_constraint([(x, 1.0)], LE, 0.0)
        model = b.build()
        res = solve_lp(model)
        with pytest.raises(ValueError):
            verify_lp(model, res, 1e-6)


class TestProperties:
    @given(st.integers(0, 10_000), st.floats(0.1, 50.0))
    @settings(max_examples=25, deadline=None)
    def test_objective_scaling(self, seed, alpha):
        rng = np.random.default_rng(seed)
        model = random_bounded_model(rng, n_max=12, m_max=8)
        res = solve_lp(model)
        if res.status != OPTIMAL:
            return
        b = ModelBuilder()
        for j, name in enumerate(model.names):
            b.add_variable(name, lb=model.lb[j], ub=model.ub[j])
            b.add_objective_term(j, alpha * model.obj[j])
        a = model.a_matrix.tocoo()
        rows: dict = {}
        for r, c, v in zip(a.row, a.col, a.data):
            rows.setdefault(r, []).append((int(c), float(v)))
        senses = {-1: LE, 0: EQ, 1: GE}
        for r in range(model.num_constraints):
            b.add_constraint(rows.get(r, []), senses[int(model.senses[r])],
                             float(model.rhs[r]))
        scaled = solve_lp(b.build())
        assert scaled.status == OPTIMAL
        assert scaled.objective == pytest.approx(alpha * res.objective,
                                                 rel=1e-7, abs=1e-7)
        np.testing.assert_allclose(scaled.x, res.x, rtol=1e-6, atol=1e-6)

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_redundant_duplicate_row(self, seed):
        rng = np.random.default_rng(seed)
        model = random_bounded_model(rng, n_max=12, m_max=8)
        res = solve_lp(model)
        if res.status != OPTIMAL:
            return
        b = ModelBuilder()
        for j, name in enumerate(model.names):
            b.add_variable(name, lb=model.lb[j], ub=model.ub[j])
            b.add_objective_term(j, model.obj[j])
        a = model.a_matrix.tocoo()
        rows: dict = {}
        for r, c, v in zip(a.row, a.col, a.data):
            rows.setdefault(r, []).append((int(c), float(v)))
        senses = {-1: LE, 0: EQ, 1: GE}
        for r in range(model.num_constraints):
            b.add_constraint(rows.get(r, []), senses[int(model.senses[r])],
                             float(model.rhs[r]))
        b.add_constraint(rows.get(0, []), senses[int(model.senses[0])],
                         float(model.rhs[0]))
        doubled = solve_lp(b.build())
        assert doubled.status == OPTIMAL
        assert doubled.objective == pytest.approx(
            res.objective, rel=1e-8, abs=1e-8 * max(1, abs(res.objective)))

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_strong_duality_random(self, seed):
        rng = np.random.default_rng(seed)
        model = random_bounded_model(rng, n_max=30, m_max=20)
        res = solve_lp(model)
        assert res.status == OPTIMAL  # feasible-by-construction and bounded
        gap = abs(res.objective - dual_objective(model, res.duals))
        assert gap <= 1e-6 * (1.0 + abs(res.objective))

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_warm_start_matches_cold(self, seed):
        rng = np.random.default_rng(seed)
        model = random_bounded_model(rng, n_max=15, m_max=10)
        ws = LPWorkspace(model)
        res = solve_prepared(ws)
        assert res.status == OPTIMAL
        j = int(rng.integers(0, model.num_variables))
        lb2, ub2 = model.lb.copy(), model.ub.copy()
        mid = 0.5 * (lb2[j] + ub2[j])
        if rng.random() < 0.5:
            ub2[j] = mid
        else:
            lb2[j] = mid
        warm = solve_prepared(ws, lb2, ub2, start=res.basis)
        cold = solve_prepared(ws, lb2, ub2)
        assert warm.status == cold.status
        if warm.status == OPTIMAL:
            assert warm.objective == pytest.approx(
                cold.objective, rel=1e-7, abs=1e-7 * max(1, abs(cold.objective)))


class TestOracleClassification:
    @given(st.integers(0, 20_000))
    @settings(max_examples=60, deadline=None)
    def test_matches_fourier_motzkin(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 4))
        b = ModelBuilder()
        for j in range(n):
            kind = rng.integers(0, 3)
            if kind == 0:
                lo, hi = sorted(rng.normal(0, 3, 2))
            elif kind == 1:
                lo, hi = rng.normal(0, 2), np.inf
            else:
                lo, hi = 0.0, np.inf
            b.add_variable(f"x{j}", lb=lo, ub=hi)
            b.add_objective_term(j, rng.normal(0, 2))
        for _ in range(int(rng.integers(0, 5))):
            nnz = int(rng.integers(1, n + 1))
            cols = rng.choice(n, size=nnz, replace=False)
            coeffs = [(int(c), float(rng.normal(0, 2))) for c in cols]
            sense = [LE, GE, EQ][int(rng.integers(0, 3))]
            b.add_constraint(coeffs, sense, float(rng.normal(0, 3)))
        model = b.build()
        assert solve_lp(model).status == oracles.classify(model)


class TestModelDump:
    def test_lp_text_mentions_rows_and_bounds(self):
        model = two_var_model()
        text = write_lp_text(model)
        assert "Minimize" in text and "Subject To" in text and "Bounds" in text
        assert "x" in text and "y" in text
