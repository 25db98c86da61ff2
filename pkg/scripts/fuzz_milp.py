"""Development fuzz harness: random MILPs, branch-and-bound vs oracles."""
import sys
import numpy as np
from scipy.optimize import milp as scipy_milp, LinearConstraint, Bounds

from stochuc.model import ModelBuilder, BINARY, LE, GE, EQ
from stochuc.milp import solve_milp, brute_force_milp, SolveOptions


def random_milp(rng, n_max=10, m_max=8, nbin_max=6):
    n = int(rng.integers(1, n_max + 1))
    nbin = int(rng.integers(0, min(nbin_max, n) + 1))
    m = int(rng.integers(0, m_max + 1))
    b = ModelBuilder()
    x0 = np.zeros(n)
    for j in range(n):
        if j < nbin:
            b.add_variable(f"b{j}", kind=BINARY)
            x0[j] = float(rng.integers(0, 2))
        else:
            lb, ub = sorted(rng.normal(0, 4, 2))
            b.add_variable(f"x{j}", lb=lb, ub=ub)
            x0[j] = rng.uniform(lb, ub)
        b.add_objective_term(j, rng.normal(0, 2))
    for r in range(m):
        nnz = int(rng.integers(1, min(n, 4) + 1))
        cols = rng.choice(n, size=nnz, replace=False)
        coeffs = [(int(c), rng.normal(0, 2)) for c in cols]
        sense = [LE, GE, EQ][int(rng.integers(0, 3))]
        act = sum(v * x0[c] for c, v in coeffs)
        slack = abs(rng.normal(0, 1.5)) if rng.random() < 0.8 else -abs(rng.normal(0, 0.5))
        rhs = act + slack if sense == LE else act - slack if sense == GE else \
            act + (0 if rng.random() < 0.8 else rng.normal(0, 0.5))
        b.add_constraint(coeffs, sense, rhs)
    return b.build()


def scipy_reference(model):
    A = model.a_matrix.toarray()
    lo = np.where(model.senses <= 0, -np.inf, model.rhs)
    lo = np.where(model.senses == 0, model.rhs, lo)
    hi = np.where(model.senses >= 0, np.inf, model.rhs)
    hi = np.where(model.senses == 0, model.rhs, hi)
    cons = LinearConstraint(A, lo, hi) if model.num_constraints else None
    res = scipy_milp(c=model.obj, constraints=cons,
                     integrality=model.is_binary.astype(int),
                     bounds=Bounds(model.lb, model.ub))
    return res


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    trials = int(sys.argv[2]) if len(sys.argv) > 2 else 300
    rng = np.random.default_rng(seed)
    n_opt = n_inf = 0
    for trial in range(trials):
        model = random_milp(rng)
        mine = solve_milp(model, SolveOptions(mip_gap=0.0))
        brute = brute_force_milp(model)
        if mine.status != brute.status:
            print(f"[{trial}] status mismatch: bnb={mine.status} brute={brute.status}")
            return 1
        if mine.status == "optimal":
            n_opt += 1
            rel = abs(mine.objective - brute.objective) / max(1.0, abs(brute.objective))
            if rel > 1e-6:
                print(f"[{trial}] objective mismatch: bnb={mine.objective} brute={brute.objective}")
                return 1
            if mine.gap > 1e-9:
                print(f"[{trial}] gap not closed: {mine.gap}")
                return 1
            ref = scipy_reference(model)
            if ref.status == 0:
                rel2 = abs(mine.objective - ref.fun) / max(1.0, abs(ref.fun))
                if rel2 > 1e-6:
                    print(f"[{trial}] scipy mismatch: bnb={mine.objective} scipy={ref.fun}")
                    return 1
            # thread invariance
            four = solve_milp(model, SolveOptions(mip_gap=0.0, threads=4))
            if four.objective != mine.objective:
                print(f"[{trial}] thread mismatch: {four.objective} vs {mine.objective}")
                return 1
            # cold-node variant agrees
            cold = solve_milp(model, SolveOptions(mip_gap=0.0, warm_start=False))
            if abs(cold.objective - mine.objective) > 1e-9 * max(1, abs(mine.objective)):
                print(f"[{trial}] warm/cold mismatch: {cold.objective} vs {mine.objective}")
                return 1
        else:
            n_inf += 1
    print(f"ok optimal={n_opt} infeasible={n_inf}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
