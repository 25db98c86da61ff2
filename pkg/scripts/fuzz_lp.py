"""Development fuzz harness: random LPs, mine vs scipy linprog (HiGHS)."""
import sys
import numpy as np
from scipy.optimize import linprog

from stochuc.model import ModelBuilder, LE, GE, EQ
from stochuc.lp import solve_lp, verify_lp, LPWorkspace, solve_prepared


def random_model(rng, n_max=12, m_max=10, feasible_bias=False):
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(0, m_max + 1))
    b = ModelBuilder()
    x0 = np.zeros(n)
    for j in range(n):
        kind = rng.integers(0, 4)
        if feasible_bias and kind == 2:
            kind = 1
        if kind == 0:
            lb, ub = 0.0, np.inf
        elif kind == 1:
            lb, ub = sorted(rng.normal(0, 5, 2))
        elif kind == 2:
            lb, ub = -np.inf, np.inf
        else:
            lb, ub = rng.normal(0, 3), np.inf
        b.add_variable(f"x{j}", lb=lb, ub=ub)
        if rng.random() < 0.9:
            b.add_objective_term(j, rng.normal(0, 2))
        lo = lb if np.isfinite(lb) else -10.0
        hi = ub if np.isfinite(ub) else lo + 10.0
        x0[j] = rng.uniform(lo, hi)
    for r in range(m):
        nnz = int(rng.integers(1, min(n, 5) + 1))
        cols = rng.choice(n, size=nnz, replace=False)
        coeffs = [(int(c), rng.normal(0, 2)) for c in cols]
        sense = [LE, GE, EQ][rng.integers(0, 3)]
        if feasible_bias:
            act = sum(v * x0[c] for c, v in coeffs)
            rhs = act + abs(rng.normal(0, 2)) if sense == LE else \
                act - abs(rng.normal(0, 2)) if sense == GE else act
        else:
            rhs = rng.normal(0, 5)
        b.add_constraint(coeffs, sense, rhs)
    return b.build()


def to_scipy(model):
    A = model.a_matrix.toarray() if model.num_constraints else None
    le = model.senses == -1
    ge = model.senses == 1
    eq = model.senses == 0
    A_ub = b_ub = A_eq = b_eq = None
    if A is not None:
        rows_ub = np.vstack([A[le], -A[ge]]) if (le.any() or ge.any()) else None
        rhs_ub = np.concatenate([model.rhs[le], -model.rhs[ge]]) if rows_ub is not None else None
        A_ub, b_ub = rows_ub, rhs_ub
        if eq.any():
            A_eq, b_eq = A[eq], model.rhs[eq]
    bounds = [(l if np.isfinite(l) else None, u if np.isfinite(u) else None)
              for l, u in zip(model.lb, model.ub)]
    return dict(c=model.obj, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds)


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    trials = int(sys.argv[2]) if len(sys.argv) > 2 else 500
    rng = np.random.default_rng(seed)
    counts = {"optimal": 0, "infeasible": 0, "unbounded": 0}
    for trial in range(trials):
        model = random_model(rng, n_max=30 if trial % 3 == 0 else 12,
                             m_max=25 if trial % 3 == 0 else 10,
                             feasible_bias=trial % 2 == 0)
        mine = solve_lp(model)
        ref = linprog(**to_scipy(model), method="highs")
        ref_status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(ref.status, "other")
        if ref_status == "other":
            continue
        if mine.status != ref_status:
            print(f"[{trial}] STATUS MISMATCH mine={mine.status} ref={ref_status}")
            print(model.names, model.lb, model.ub, model.obj)
            print(model.a_matrix.toarray(), model.senses, model.rhs)
            return 1
        counts[mine.status] += 1
        if mine.status == "optimal":
            gap = abs(mine.objective - ref.fun) / (1 + abs(ref.fun))
            if gap > 1e-7:
                print(f"[{trial}] OBJ MISMATCH mine={mine.objective} ref={ref.fun}")
                print(model.a_matrix.toarray(), model.senses, model.rhs, model.lb, model.ub, model.obj)
                return 1
            if not verify_lp(model, mine, 1e-6):
                print(f"[{trial}] verify_lp FAILED obj={mine.objective}")
                return 1
            # warm-start re-solve with a perturbed bound must agree with cold
            ws = LPWorkspace(model)
            j = int(rng.integers(0, model.num_variables))
            lb2, ub2 = model.lb.copy(), model.ub.copy()
            x_j = mine.x[j]
            if rng.random() < 0.5:
                ub2[j] = x_j - abs(rng.normal(0, 1))
                lb2[j] = min(lb2[j], ub2[j])
            else:
                lb2[j] = x_j + abs(rng.normal(0, 1))
                ub2[j] = max(ub2[j], lb2[j])
            warm = solve_prepared(ws, lb2, ub2, start=mine.basis)
            cold = solve_prepared(ws, lb2, ub2)
            if warm.status != cold.status:
                print(f"[{trial}] WARM STATUS mismatch {warm.status} vs {cold.status}")
                return 1
            if warm.status == "optimal":
                g = abs(warm.objective - cold.objective) / (1 + abs(cold.objective))
                if g > 1e-7:
                    print(f"[{trial}] WARM OBJ mismatch {warm.objective} vs {cold.objective}")
                    return 1
    print("ok", counts)
    return 0


if __name__ == "__main__":
    sys.exit(main())
