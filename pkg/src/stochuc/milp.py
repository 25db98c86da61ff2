"""Branch-and-bound MILP solver over the LP core, plus a brute-force oracle.

Search order: depth-first dive until the first incumbent, then best-bound.
In the best-bound phase open nodes are processed in fixed-size batches; a
thread pool may evaluate the batch LPs concurrently, but batch composition
and processing order depend only on the node queue, so results are identical
for any thread count.  Node LPs warm-start from the parent basis by default.

Progress is reported on the ``stochuc.milp`` logger as single parseable
lines: ``nodes=<int> incumbent=<float> bound=<float> gap=<float>``.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .model import MILPModel

log = logging.getLogger("stochuc.milp")

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
GAP_LIMIT = "gap_limit"
NODE_LIMIT = "node_limit"

MOST_FRACTIONAL = "most_fractional"
PSEUDO_COST = "pseudo_cost"

_INT_TOL = 1e-6
_PRUNE_EPS = 1e-9
_NODE_BATCH = 8


@dataclass(frozen=True)
class SolveOptions:
    mip_gap: float = 1e-4
    node_limit: int | None = None
    time_limit: float | None = None
    branching: str = MOST_FRACTIONAL
    threads: int = 1
    warm_start: bool = True
    lp_tol: lp.LPTolerances = lp.LPTolerances()
    node_callback: object = None  # callable(node_bound, parent_bound, objective)
    branch_priority: object = None  # per-variable int array; lower class first

    def __post_init__(self):
        if self.mip_gap < 0:
            raise ValueError("mip_gap must be nonnegative")
        if self.branching not in (MOST_FRACTIONAL, PSEUDO_COST):
            raise ValueError(f"unknown branching rule {self.branching!r}")


@dataclass(frozen=True)
class MILPResult:
    status: str
    x: np.ndarray | None
    objective: float
    bound: float
    gap: float
    nodes: int


@dataclass(order=True)
class _Node:
    bound: float  # parent LP objective: a valid lower bound before solving
    node_id: int
    depth: int = field(compare=False, default=0)
    fixes: tuple = field(compare=False, default=())
    basis: lp.Basis | None = field(compare=False, default=None)
    frac: float = field(compare=False, default=0.5)


class _PseudoCosts:
    """Average objective degradation per unit of fractionality, per direction."""

    def __init__(self, nvars: int):
        self.sums = np.zeros((nvars, 2))
        self.counts = np.zeros((nvars, 2), dtype=np.int64)

    def update(self, var: int, direction: int, degradation: float, frac: float):
        if frac > 1e-9:
            self.sums[var, direction] += max(degradation, 0.0) / frac
            self.counts[var, direction] += 1

    def score(self, var: int, frac: float, fallback: float) -> float:
        down = (self.sums[var, 0] / self.counts[var, 0]) if self.counts[var, 0] else fallback
        up = (self.sums[var, 1] / self.counts[var, 1]) if self.counts[var, 1] else fallback
        return max(down * frac, 1e-9) * max(up * (1.0 - frac), 1e-9)


class _Search:
    def __init__(self, model: MILPModel, options: SolveOptions):
        self.model = model
        self.options = options
        self.ws = lp.LPWorkspace(model)
        self.binaries = model.binary_indices()
        self._a_csc = model.a_matrix.tocsc()
        self.incumbent_x: np.ndarray | None = None
        self.incumbent = np.inf
        self.heap: list[_Node] = []
        self.nodes = 0
        self.next_id = 1
        self.pseudo = _PseudoCosts(model.num_variables)
        self.started = time.monotonic()

    # --------------------------------------------------------------- plumbing

    def node_bounds(self, fixes: tuple) -> tuple[np.ndarray, np.ndarray]:
        lb = self.model.lb.copy()
        ub = self.model.ub.copy()
        for var, val in fixes:
            lb[var] = val
            ub[var] = val
        return lb, ub

    def solve_node(self, node: _Node) -> lp.LPResult:
        lb, ub = self.node_bounds(node.fixes)
        start = node.basis if self.options.warm_start else None
        return lp.solve_prepared(self.ws, lb, ub, start=start,
                                 tol=self.options.lp_tol)

    def out_of_budget(self) -> str | None:
        if self.options.node_limit is not None and self.nodes >= self.options.node_limit:
            return NODE_LIMIT
        if self.options.time_limit is not None and \
                time.monotonic() - self.started > self.options.time_limit:
            return GAP_LIMIT
        return None

    def prune_value(self) -> float:
        return self.incumbent - _PRUNE_EPS * max(1.0, abs(self.incumbent))

    def best_bound(self) -> float:
        bound = min((n.bound for n in self.heap), default=np.inf)
        return min(bound, self.incumbent)

    def gap(self, bound: float) -> float:
        if not np.isfinite(self.incumbent):
            return np.inf
        return max(0.0, (self.incumbent - bound) / max(1.0, abs(self.incumbent)))

    def log_progress(self, bound: float) -> None:
        log.info("nodes=%d incumbent=%.9g bound=%.9g gap=%.6g",
                 self.nodes, self.incumbent, bound, self.gap(bound))

    def branch_variable(self, x: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> int:
        vals = x[self.binaries]
        frac = np.abs(vals - np.round(vals))
        open_mask = (ub[self.binaries] - lb[self.binaries]) > 0.5
        cand = np.flatnonzero((frac > _INT_TOL) & open_mask)
        if cand.size == 0:
            return -1
        if self.options.branch_priority is not None:
            prio = np.asarray(self.options.branch_priority)[self.binaries[cand]]
            cand = cand[prio == prio.min()]
        if self.options.branching == MOST_FRACTIONAL:
            dist = np.abs(vals[cand] - np.floor(vals[cand]) - 0.5)
            return int(self.binaries[cand[np.argmin(dist)]])
        scores = np.array([
            self.pseudo.score(int(self.binaries[c]), float(frac[c]),
                              fallback=1e-6 + 0.5 - abs(float(frac[c]) - 0.5))
            for c in cand])
        return int(self.binaries[cand[np.argmax(scores)]])

    def zero_cost_repair(self, x: np.ndarray, lb: np.ndarray,
                         ub: np.ndarray) -> np.ndarray | None:
        """Round fractional zero-objective binaries when rows stay feasible.

        Binaries with no objective coefficient (here: battery charge-mode
        indicators) often come out fractional from a degenerate relaxation
        even though some rounding is feasible at the same objective.  The
        repair is exact: a candidate is accepted only if every constraint row
        holds at the rounded point, so an accepted point is an alternate
        optimum of the node relaxation that happens to be integral.
        """
        vals = x[self.binaries]
        frac = np.abs(vals - np.round(vals))
        fractional = self.binaries[frac > _INT_TOL]
        if fractional.size == 0 or np.any(self.model.obj[fractional] != 0.0):
            return None
        trial = x.copy()
        a_csc = self._a_csc
        scale = np.maximum(1.0, np.abs(self.model.rhs))
        for j in fractional:
            if ub[j] - lb[j] < 0.5:
                return None  # fixed but fractional: numerical trouble, branch
            near = round(float(trial[j]))
            done = False
            for value in (near, 1 - near):
                trial[j] = float(value)
                lo, hi = a_csc.indptr[j], a_csc.indptr[j + 1]
                rows = a_csc.indices[lo:hi]
                act = self.model.a_matrix[rows] @ trial
                res = act - self.model.rhs[rows]
                sens = self.model.senses[rows]
                tol = 1e-7 * scale[rows]
                ok = np.all(
                    ((sens == -1) & (res <= tol))
                    | ((sens == 1) & (res >= -tol))
                    | ((sens == 0) & (np.abs(res) <= tol)))
                if ok:
                    done = True
                    break
            if not done:
                return None
        return trial

    def reduced_cost_fixes(self, node: _Node, res: lp.LPResult,
                           lb: np.ndarray, ub: np.ndarray) -> tuple:
        """Binaries provably stuck at their bound in any improving descendant.

        For a non-basic binary at a bound, flipping it costs at least its
        reduced cost in the relaxation; when that already meets the incumbent
        the opposite value cannot improve, so the child subtrees may fix it.
        """
        if not np.isfinite(self.incumbent):
            return ()
        slack = self.prune_value() - res.objective
        if slack < 0:
            return ()
        fixes = []
        for j in self.binaries:
            if ub[j] - lb[j] < 0.5:
                continue
            d = res.reduced_costs[j]
            x = res.x[j]
            if x < _INT_TOL and d > slack:
                fixes.append((int(j), 0.0))
            elif x > 1.0 - _INT_TOL and -d > slack:
                fixes.append((int(j), 1.0))
        return tuple(fixes)

    def make_children(self, node: _Node, res: lp.LPResult, var: int,
                      extra_fixes: tuple = ()) -> list[_Node]:
        """Two children fixing `var`; the child matching the LP value is last."""
        x_val = float(res.x[var])
        f = x_val - np.floor(x_val)
        children = []
        for value, frac in ((0.0, f), (1.0, 1.0 - f)):
            children.append(_Node(bound=res.objective, node_id=self.next_id,
                                  depth=node.depth + 1,
                                  fixes=node.fixes + extra_fixes + ((var, value),),
                                  basis=res.basis, frac=frac))
            self.next_id += 1
        if x_val < 0.5:
            children.reverse()
        return children

    # ----------------------------------------------------------------- search

    def handle_solved(self, node: _Node, res: lp.LPResult) -> list[_Node]:
        """Digest one solved node; returns children to enqueue (maybe none)."""
        self.nodes += 1
        if res.status == lp.INFEASIBLE:
            return []
        if res.status == lp.UNBOUNDED:
            raise ValueError("relaxation is unbounded; MILP models must be bounded")
        if self.options.node_callback is not None:
            self.options.node_callback(node.bound, res.objective, self.incumbent)
        if node.fixes:
            var, val = node.fixes[-1]
            if np.isfinite(node.bound):
                self.pseudo.update(var, int(val > 0.5),
                                   res.objective - node.bound, node.frac)
        if res.objective >= self.prune_value():
            return []
        lb, ub = self.node_bounds(node.fixes)
        var = self.branch_variable(res.x, lb, ub)
        if var >= 0:
            repaired = self.zero_cost_repair(res.x, lb, ub)
            if repaired is None:
                extra = self.reduced_cost_fixes(node, res, lb, ub)
                return self.make_children(node, res, var, extra)
            x_opt = repaired
        else:
            x_opt = res.x
        self.incumbent = res.objective
        self.incumbent_x = x_opt.copy()
        self.log_progress(self.best_bound())
        return []

    def run(self) -> MILPResult:
        res = lp.solve_prepared(self.ws, tol=self.options.lp_tol)
        if res.status == lp.INFEASIBLE:
            return MILPResult(INFEASIBLE, None, np.nan, np.nan, np.nan, 1)
        if res.status == lp.UNBOUNDED:
            raise ValueError("relaxation is unbounded; MILP models must be bounded")
        root = _Node(bound=res.objective, node_id=0)
        root_bound = res.objective
        stack = self.handle_solved(root, res)
        status = None
        # depth-first dive until the first incumbent
        while stack and self.incumbent_x is None:
            status = self.out_of_budget()
            if status:
                break
            node = stack.pop()
            child_res = self.solve_node(node)
            stack.extend(self.handle_solved(node, child_res))
        for node in stack:
            heapq.heappush(self.heap, node)
        # best-bound phase in deterministic fixed-size batches
        pool = (ThreadPoolExecutor(max_workers=self.options.threads)
                if self.options.threads > 1 else None)
        try:
            while self.heap:
                status = status or self.out_of_budget()
                if status:
                    break
                if self.gap(self.best_bound()) <= self.options.mip_gap:
                    break
                batch = []
                while self.heap and len(batch) < _NODE_BATCH:
                    node = heapq.heappop(self.heap)
                    if node.bound >= self.prune_value():
                        continue  # pruned by bound without an LP solve
                    batch.append(node)
                if not batch:
                    continue
                if pool is not None:
                    results = list(pool.map(self.solve_node, batch))
                else:
                    results = [self.solve_node(n) for n in batch]
                for node, node_res in zip(batch, results):
                    for child in self.handle_solved(node, node_res):
                        heapq.heappush(self.heap, child)
                self.log_progress(self.best_bound())
        finally:
            if pool is not None:
                pool.shutdown()
        bound = self.best_bound()
        if self.incumbent_x is None:
            if status in (NODE_LIMIT, GAP_LIMIT):
                b = bound if np.isfinite(bound) else root_bound
                return MILPResult(status, None, np.nan, b, np.inf, self.nodes)
            return MILPResult(INFEASIBLE, None, np.nan, np.nan, np.nan, self.nodes)
        gap = self.gap(bound)
        if status is None:
            status = OPTIMAL if gap <= self.options.mip_gap + 1e-15 else GAP_LIMIT
        x = self.incumbent_x.copy()
        bin_vals = x[self.binaries]
        if np.any(np.abs(bin_vals - np.round(bin_vals)) > _INT_TOL):
            raise AssertionError("incumbent lost integrality")
        x[self.binaries] = np.round(bin_vals)
        self.log_progress(bound)
        return MILPResult(status, x, float(self.incumbent), float(bound),
                          float(gap), self.nodes)


def solve_milp(model: MILPModel, options: SolveOptions = SolveOptions()) -> MILPResult:
    """Branch-and-bound over the binary variables of the model.

    Deterministic for fixed options: node ids, branching tie-breaks (lowest
    variable index first), and batch processing order do not depend on timing
    or thread count.  Terminates ``optimal`` when the relative gap reaches
    ``options.mip_gap``; ``node_limit`` reports a node-budget stop and
    ``gap_limit`` a time-budget stop with the gap still open.
    """
    return _Search(model, options).run()


def brute_force_milp(model: MILPModel, max_binaries: int = 16,
                     tol: lp.LPTolerances = lp.LPTolerances()) -> MILPResult:
    """Exhaustive oracle: enumerate binary assignments, solve each restriction.

    Exact up to LP tolerance; refuses instances with more than
    ``max_binaries`` free binary variables.
    """
    binaries = [int(j) for j in model.binary_indices()
                if model.ub[j] - model.lb[j] > 0.5]
    if len(binaries) > max_binaries:
        raise ValueError(f"{len(binaries)} binaries exceed the oracle limit {max_binaries}")
    ws = lp.LPWorkspace(model)
    best = None
    best_x = None
    nodes = 0
    for assignment in itertools.product((0.0, 1.0), repeat=len(binaries)):
        lb = model.lb.copy()
        ub = model.ub.copy()
        for var, val in zip(binaries, assignment):
            lb[var] = val
            ub[var] = val
        res = lp.solve_prepared(ws, lb, ub, tol=tol)
        nodes += 1
        if res.status == lp.UNBOUNDED:
            raise ValueError("relaxation is unbounded; MILP models must be bounded")
        if res.status == lp.OPTIMAL and (best is None or res.objective < best):
            best = res.objective
            best_x = res.x.copy()
    if best is None:
        return MILPResult(INFEASIBLE, None, np.nan, np.nan, np.nan, nodes)
    bin_idx = model.binary_indices()
    best_x[bin_idx] = np.round(best_x[bin_idx])
    return MILPResult(OPTIMAL, best_x, float(best), float(best), 0.0, nodes)
