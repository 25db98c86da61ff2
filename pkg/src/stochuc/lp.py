"""Primal simplex linear-programming core.

Bounded-variable two-phase primal simplex over the relaxation of a
:class:`~stochuc.model.MILPModel`.  The implementation is a revised simplex:
the basis is factorized with SuperLU and kept current between refactorizations
through product-form updates, whose hot loops live in ``stochuc._kernels``.

Internal column layout for a model with n variables and m rows:

* ``0 .. n-1``        structural variables,
* ``n .. n+m-1``      one slack per row (``<=`` gives ``[0, inf)``, ``==``
  gives ``[0, 0]``, ``>=`` gives ``(-inf, 0]``),
* ``n+m .. n+2m-1``   phase-1 artificials, created only for rows whose
  initial basic slack would violate its bounds.

Equality rows are handled with artificial variables in phase 1; infeasibility
is declared when the phase-1 objective stays above the feasibility tolerance.
Bland's rule is engaged after 1000 consecutive degenerate pivots.  Warm
restarts from an exported basis repair out-of-bound basics with push phases
(one auxiliary objective per violated variable) instead of a full phase 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels as kern
from .model import MILPModel

AT_LOWER = np.int8(0)
AT_UPPER = np.int8(1)
FREE = np.int8(2)
BASIC = np.int8(3)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_REFACTOR_EVERY = 64
_BLAND_TRIGGER = 1000
_PIVOT_TOL = 1e-9
_DEGENERATE_STEP = 1e-11


@dataclass(frozen=True)
class LPTolerances:
    feasibility: float = 1e-7
    optimality: float = 1e-7


@dataclass(frozen=True)
class Basis:
    """Restart information: basic column ids, statuses, artificial signs."""

    basic: np.ndarray  # int64 (m,)
    status: np.ndarray  # int8 (n + 2m,)
    art_sign: np.ndarray  # float64 (m,)


@dataclass(frozen=True)
class LPResult:
    status: str
    objective: float
    x: np.ndarray  # structural values (n,)
    duals: np.ndarray  # row duals (m,)
    reduced_costs: np.ndarray  # structural reduced costs (n,)
    iterations: int
    basis: Basis | None


class _EmptyLU:
    def solve(self, v, trans="N"):
        return np.zeros(0)


class LPWorkspace:
    """Prepared immutable view of one model, reusable across many solves."""

    def __init__(self, model: MILPModel):
        problems = model.validate()
        if problems:
            raise ValueError("model invariants violated: " + "; ".join(problems))
        self.model = model
        n, m = model.num_variables, model.num_constraints
        self.n = n
        self.m = m
        a_csc = model.a_matrix.tocsc()
        if m:
            eye = sp.identity(m, format="csc")
            self.a_ext = sp.hstack([a_csc, eye], format="csc")
        else:
            self.a_ext = sp.csc_matrix((0, n))
        self.a_ext_t = self.a_ext.T.tocsr()
        self.obj_ext = np.concatenate([model.obj, np.zeros(m)])
        slack_lb = np.where(model.senses == 1, -np.inf, 0.0)
        slack_ub = np.where(model.senses == -1, np.inf, 0.0)
        self.lb_base = np.concatenate([model.lb, slack_lb])
        self.ub_base = np.concatenate([model.ub, slack_ub])
        # Structural columns with a single nonzero, grouped by that row:
        # crash candidates that spare equality rows a phase-1 artificial.
        nnz_per_col = np.diff(a_csc.indptr)
        self.crash_cols: dict[int, list[tuple[int, float]]] = {}
        for j in np.flatnonzero(nnz_per_col == 1):
            k = a_csc.indptr[j]
            r = int(a_csc.indices[k])
            if model.senses[r] == 0:
                self.crash_cols.setdefault(r, []).append((int(j), float(a_csc.data[k])))

    def column(self, col: int):
        """Rows and values of an extended column (structural or slack)."""
        a = self.a_ext
        lo, hi = a.indptr[col], a.indptr[col + 1]
        return a.indices[lo:hi], a.data[lo:hi]


class _Simplex:
    """One solve: mutable basis state over a prepared workspace."""

    def __init__(self, ws: LPWorkspace, lb_override=None, ub_override=None,
                 tol: LPTolerances = LPTolerances(), log=None):
        self.ws = ws
        self.tol = tol
        self.log = log
        n, m = ws.n, ws.m
        self.nm = n + m
        self.ntot = self.nm + m
        self.lb = np.concatenate([ws.lb_base, np.zeros(m)])
        self.ub = np.concatenate([ws.ub_base, np.zeros(m)])
        if lb_override is not None:
            self.lb[:n] = lb_override
        if ub_override is not None:
            self.ub[:n] = ub_override
        if np.any(self.lb[:n] > self.ub[:n]):
            raise ValueError("lower bound exceeds upper bound")
        self.status = np.empty(self.ntot, dtype=np.int8)
        self.basis = np.empty(m, dtype=np.int64)
        self.in_basis_pos = np.full(self.ntot, -1, dtype=np.int64)
        self.x_b = np.zeros(m)
        self.lb_b = np.zeros(m)
        self.ub_b = np.zeros(m)
        self.art_sign = np.ones(m)
        self.sealed = np.zeros(self.nm, dtype=bool)
        self.lu = _EmptyLU()
        self.eta_rows = np.zeros(_REFACTOR_EVERY, dtype=np.int64)
        self.eta_mat = np.zeros((_REFACTOR_EVERY, m))
        self.eta_count = 0
        self.iterations = 0
        self.degenerate_run = 0
        self.bland = False
        self.d = np.zeros(self.nm)
        self.cost = np.zeros(self.ntot)
        self.devex = np.ones(self.nm)  # reference weights for devex pricing

    # ------------------------------------------------------------------ values

    def nonbasic_values(self) -> np.ndarray:
        """Implied values of all non-basic extended columns (basics get 0)."""
        s = self.status[:self.nm]
        vals = np.where(s == AT_LOWER, self.lb[:self.nm],
                        np.where(s == AT_UPPER, self.ub[:self.nm], 0.0))
        vals[s == BASIC] = 0.0
        return vals

    def nonbasic_value(self, col: int) -> float:
        s = self.status[col]
        if s == AT_LOWER:
            return float(self.lb[col])
        if s == AT_UPPER:
            return float(self.ub[col])
        return 0.0

    # ------------------------------------------------------------------ setup

    def cold_start(self) -> bool:
        """Slack basis with equality-row crash; True if phase 1 is needed."""
        ws, n, m = self.ws, self.ws.n, self.ws.m
        lbf = np.isfinite(self.lb[:self.nm])
        self.status[:self.nm] = np.where(
            lbf, AT_LOWER, np.where(np.isfinite(self.ub[:self.nm]), AT_UPPER, FREE))
        self.status[self.nm:] = AT_LOWER  # artificials parked at zero
        x_init = self.nonbasic_values()
        resid = ws.model.rhs - (ws.a_ext @ x_init if m else np.zeros(0))
        need_phase1 = False
        for r in range(m):
            slack = n + r
            chosen = -1
            value = 0.0
            for j, coeff in ws.crash_cols.get(r, ()):
                v = x_init[j] + resid[r] / coeff
                if self.lb[j] - 1e-12 <= v <= self.ub[j] + 1e-12:
                    chosen = j
                    value = min(max(v, self.lb[j]), self.ub[j])
                    break
            if chosen < 0:
                s_val = resid[r]
                if self.lb[slack] - 1e-11 <= s_val <= self.ub[slack] + 1e-11:
                    chosen, value = slack, s_val
                else:
                    chosen = self.nm + r
                    self.art_sign[r] = 1.0 if s_val >= 0 else -1.0
                    self.ub[chosen] = np.inf
                    value = abs(s_val)
                    need_phase1 = True
            self.basis[r] = chosen
            self.in_basis_pos[chosen] = r
            self.status[chosen] = BASIC
            self.x_b[r] = value
            self.lb_b[r] = self.lb[chosen]
            self.ub_b[r] = self.ub[chosen]
        self.refactor()
        return need_phase1

    def warm_start(self, start: Basis) -> np.ndarray:
        """Adopt an exported basis; returns positions of out-of-bound basics."""
        m = self.ws.m
        self.status[:] = start.status
        self.basis[:] = start.basic
        self.art_sign[:] = start.art_sign
        self.in_basis_pos[:] = -1
        self.in_basis_pos[self.basis] = np.arange(m)
        nb = self.status[:self.nm] != BASIC
        bad_low = nb & (self.status[:self.nm] == AT_LOWER) & ~np.isfinite(self.lb[:self.nm])
        bad_up = nb & (self.status[:self.nm] == AT_UPPER) & ~np.isfinite(self.ub[:self.nm])
        for col in np.flatnonzero(bad_low | bad_up):
            if np.isfinite(self.lb[col]):
                self.status[col] = AT_LOWER
            elif np.isfinite(self.ub[col]):
                self.status[col] = AT_UPPER
            else:
                self.status[col] = FREE
        arts = self.basis[self.basis >= self.nm]
        self.ub[arts] = 0.0
        self.lb_b[:] = self.lb[self.basis]
        self.ub_b[:] = self.ub[self.basis]
        self.refactor()
        feas = self.tol.feasibility
        return np.flatnonzero((self.x_b < self.lb_b - feas)
                              | (self.x_b > self.ub_b + feas))

    # ----------------------------------------------------------- linear algebra

    def basis_matrix(self) -> sp.csc_matrix:
        """Gather the basis columns of [A | I | artificials] without copies per column."""
        ws, m = self.ws, self.ws.m
        a = ws.a_ext
        real = self.basis < self.nm
        real_cols = self.basis[real]
        starts = a.indptr[real_cols]
        lens = a.indptr[real_cols + 1] - starts
        out_len = np.ones(m, dtype=np.int64)
        out_len[real] = lens
        indptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(out_len, out=indptr[1:])
        total = int(indptr[-1])
        indices = np.empty(total, dtype=np.int32)
        data = np.empty(total)
        if real_cols.size:
            src = _concat_ranges(starts, lens)
            dst = _concat_ranges(indptr[:-1][real], lens)
            indices[dst] = a.indices[src]
            data[dst] = a.data[src]
        art = ~real
        if art.any():
            art_rows = self.basis[art] - self.nm
            pos = indptr[:-1][art]
            indices[pos] = art_rows
            data[pos] = self.art_sign[art_rows]
        return sp.csc_matrix((data, indices, indptr), shape=(m, m))

    def refactor(self) -> None:
        if self.ws.m == 0:
            self.lu = _EmptyLU()
            self.eta_count = 0
            return
        mat = self.basis_matrix()
        self.lu = spla.splu(mat.tocsc(), permc_spec="COLAMD")
        self.eta_count = 0
        self.recompute_basics()

    def recompute_basics(self) -> None:
        ws, m = self.ws, self.ws.m
        if m == 0:
            return
        resid = ws.model.rhs - ws.a_ext @ self.nonbasic_values()
        self.x_b = self.lu.solve(resid)

    def ftran(self, v: np.ndarray) -> np.ndarray:
        x = self.lu.solve(v)
        if self.eta_count:
            kern.apply_etas_forward(self.eta_rows, self.eta_mat, self.eta_count, x)
        return x

    def btran(self, v: np.ndarray) -> np.ndarray:
        y = v.copy()
        if self.eta_count:
            kern.apply_etas_transposed(self.eta_rows, self.eta_mat, self.eta_count, y)
        return self.lu.solve(y, trans="T")

    def column_dense(self, col: int) -> np.ndarray:
        v = np.zeros(self.ws.m)
        if col < self.nm:
            rows, vals = self.ws.column(col)
            v[rows] = vals
        else:
            v[col - self.nm] = self.art_sign[col - self.nm]
        return v

    # ------------------------------------------------------------------ pricing

    def set_phase_costs(self, phase: int, push_col: int = -1,
                        push_sign: float = 0.0) -> None:
        c = np.zeros(self.ntot)
        if phase == 2:
            c[:self.nm] = self.ws.obj_ext
        elif phase == 1:
            c[self.nm:] = 1.0
        else:  # push phase of a warm start
            c[push_col] = push_sign
        self.cost = c
        self.recompute_reduced_costs()

    def recompute_reduced_costs(self) -> None:
        if self.ws.m == 0:
            self.d = self.cost[:self.nm].copy()
            return
        y = self.btran(self.cost[self.basis])
        self.d = self.cost[:self.nm] - self.ws.a_ext_t @ y

    def duals(self) -> np.ndarray:
        if self.ws.m == 0:
            return np.zeros(0)
        return self.btran(self.cost[self.basis])

    def choose_entering(self) -> tuple[int, float]:
        d = self.d
        status = self.status[:self.nm]
        opt = self.tol.optimality
        not_fixed = (self.ub[:self.nm] > self.lb[:self.nm]) & ~self.sealed
        at_lb = (status == AT_LOWER) & not_fixed
        at_ub = (status == AT_UPPER) & not_fixed
        free = (status == FREE) & ~self.sealed
        eligible = (at_lb & (d < -opt)) | (at_ub & (d > opt)) | (free & (np.abs(d) > opt))
        if not eligible.any():
            return -1, 0.0
        if self.bland:
            q = int(np.flatnonzero(eligible)[0])
        else:
            score = np.where(eligible, -(d * d) / self.devex, np.inf)
            q = int(np.argmin(score))
        sigma = 1.0 if (status[q] == AT_LOWER or (status[q] == FREE and d[q] < 0)) else -1.0
        return q, sigma

    # ------------------------------------------------------------------- pivot

    def record_eta(self, alpha: np.ndarray, pos: int) -> None:
        piv = alpha[pos]
        eta = alpha * (-1.0 / piv)
        eta[pos] = 1.0 / piv
        self.eta_rows[self.eta_count] = pos
        self.eta_mat[self.eta_count] = eta
        self.eta_count += 1

    def pivot(self, q: int, sigma: float, alpha: np.ndarray, t: float,
              pos: int, kind: int) -> None:
        if kind == kern.KIND_BOUND_FLIP:
            kern.update_basics(self.x_b, alpha, sigma, t)
            self.status[q] = AT_UPPER if self.status[q] == AT_LOWER else AT_LOWER
            return
        leaving = int(self.basis[pos])
        x_q = self.nonbasic_value(q) + sigma * t
        kern.update_basics(self.x_b, alpha, sigma, t)
        rho = self.btran(_unit(self.ws.m, pos))
        pivot_row = self.ws.a_ext_t @ rho
        self.d -= (self.d[q] / alpha[pos]) * pivot_row
        self.d[q] = 0.0
        # devex reference-weight update (Forrest-Goldfarb)
        piv = pivot_row[q]
        if abs(piv) > _PIVOT_TOL:
            ref = self.devex[q]
            if ref > 1e8:
                self.devex[:] = 1.0
            else:
                ratio = pivot_row * (1.0 / piv)
                np.maximum(self.devex, ratio * ratio * ref, out=self.devex)
                if leaving < self.nm:
                    self.devex[leaving] = max(ref / (piv * piv), 1.0)
        self.record_eta(alpha, pos)
        self.basis[pos] = q
        self.in_basis_pos[q] = pos
        self.in_basis_pos[leaving] = -1
        self.status[q] = BASIC
        self.status[leaving] = AT_LOWER if kind == kern.KIND_LEAVE_LOWER else AT_UPPER
        self.x_b[pos] = x_q
        self.lb_b[pos] = self.lb[q]
        self.ub_b[pos] = self.ub[q]
        if self.eta_count >= _REFACTOR_EVERY:
            self.refactor()
            self.recompute_reduced_costs()

    # -------------------------------------------------------------- main loop

    def push_reached(self, col: int, target: float, direction: float) -> bool:
        pos = self.in_basis_pos[col]
        val = self.x_b[pos] if pos >= 0 else self.nonbasic_value(col)
        if direction > 0:
            return val >= target - 10 * self.tol.feasibility
        return val <= target + 10 * self.tol.feasibility

    def run_phase(self, stop_col: int = -1, stop_target: float = 0.0,
                  stop_dir: float = 0.0) -> str:
        """Iterate the current phase objective to optimality.

        When ``stop_col`` >= 0 the loop also stops as soon as that column's
        value reaches ``stop_target`` (push phase of a warm start).  Returns
        "optimal", "unbounded", or "pushed".
        """
        max_iter = max(20000, 60 * (self.ws.m + self.nm))
        while True:
            if stop_col >= 0 and self.push_reached(stop_col, stop_target, stop_dir):
                return "pushed"
            q, sigma = self.choose_entering()
            if q < 0:
                if self.eta_count:
                    self.refactor()
                    self.recompute_reduced_costs()
                    q, sigma = self.choose_entering()
                    if q < 0:
                        return OPTIMAL
                else:
                    return OPTIMAL
            alpha = self.ftran(self.column_dense(q))
            gap = self.ub[q] - self.lb[q]
            t, pos, kind = kern.ratio_test(
                self.x_b, self.lb_b, self.ub_b, alpha, sigma, gap,
                _PIVOT_TOL, self.bland, self.basis)
            if kind == kern.KIND_UNBOUNDED:
                return UNBOUNDED
            if kind != kern.KIND_BOUND_FLIP and abs(alpha[pos]) < 10 * _PIVOT_TOL:
                if self.eta_count:
                    self.refactor()
                    self.recompute_reduced_costs()
                    continue
                self.sealed[q] = True  # numerically unusable column
                continue
            self.pivot(q, sigma, alpha, t, pos, kind)
            self.iterations += 1
            if t <= _DEGENERATE_STEP:
                self.degenerate_run += 1
                if self.degenerate_run > _BLAND_TRIGGER:
                    self.bland = True
            else:
                self.degenerate_run = 0
                self.bland = False
            if self.log is not None and self.iterations % 256 == 0:
                self.log({"iteration": self.iterations,
                          "phase_objective": float(self.cost[self.basis] @ self.x_b)})
            if self.iterations > max_iter:
                raise RuntimeError("simplex iteration limit exceeded")

    # ------------------------------------------------------------ dual simplex

    def dual_feasible(self) -> bool:
        """Reduced costs signed correctly for the current nonbasic statuses."""
        opt = 10 * self.tol.optimality
        status = self.status[:self.nm]
        open_var = self.ub[:self.nm] > self.lb[:self.nm]
        bad_lb = (status == AT_LOWER) & open_var & (self.d < -opt)
        bad_ub = (status == AT_UPPER) & open_var & (self.d > opt)
        bad_fr = (status == FREE) & (np.abs(self.d) > opt)
        return not (bad_lb.any() or bad_ub.any() or bad_fr.any())

    def run_dual(self) -> str:
        """Dual simplex from a dual-feasible basis to primal feasibility.

        Used for warm re-solves after bound changes (branch-and-bound nodes):
        terminates "optimal" when no basic violates its bounds, "infeasible"
        when a violated row admits no entering column, and "stalled" when an
        iteration safety budget is exhausted (caller falls back to primal).
        """
        feas = self.tol.feasibility
        max_iter = max(20000, 60 * (self.ws.m + self.nm))
        status = self.status[:self.nm]
        while True:
            low_viol = self.lb_b - self.x_b
            up_viol = self.x_b - self.ub_b
            viol = np.maximum(low_viol, up_viol)
            r = int(np.argmax(viol)) if viol.size else 0
            if viol.size == 0 or viol[r] <= feas:
                return OPTIMAL
            leave_at_upper = up_viol[r] >= low_viol[r]
            rho = self.btran(_unit(self.ws.m, r))
            w = self.ws.a_ext_t @ rho
            # moving the entering variable must pull x_b[r] back toward its bound
            delta = 1.0 if leave_at_upper else -1.0
            open_var = (self.ub[:self.nm] > self.lb[:self.nm]) & ~self.sealed
            can_inc = open_var & ((status == AT_LOWER) | (status == FREE))
            can_dec = open_var & ((status == AT_UPPER) | (status == FREE))
            elig_inc = can_inc & (delta * w > 1e-9)
            elig_dec = can_dec & (delta * w < -1e-9)
            eligible = elig_inc | elig_dec
            if not eligible.any():
                return INFEASIBLE
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(eligible, np.abs(self.d) / np.abs(w), np.inf)
            remaining = float(up_viol[r] if leave_at_upper else low_viol[r])
            # bound-flipping ratio test: cheap flips absorb part of the
            # violation before the actual pivot
            flip_guard = 0
            while True:
                q = int(np.argmin(ratios))
                if not np.isfinite(ratios[q]):
                    return INFEASIBLE
                gap = self.ub[q] - self.lb[q]
                step_q = remaining / abs(w[q])
                if step_q <= gap + 1e-12 or not np.isfinite(gap):
                    break
                # flipping q absorbs |w_q| * gap of the violation
                alpha_q = self.ftran(self.column_dense(q))
                sigma_q = 1.0 if elig_inc[q] else -1.0
                kern.update_basics(self.x_b, alpha_q, sigma_q, gap)
                self.status[q] = AT_UPPER if self.status[q] == AT_LOWER else AT_LOWER
                remaining -= abs(w[q]) * gap
                ratios[q] = np.inf
                flip_guard += 1
                if remaining <= feas:
                    break
                if flip_guard > self.nm:
                    raise RuntimeError("dual bound-flip loop failed to converge")
            if remaining <= feas:
                self.iterations += 1
                continue
            sigma = 1.0 if elig_inc[q] else -1.0
            alpha = self.ftran(self.column_dense(q))
            if abs(alpha[r]) < 10 * _PIVOT_TOL:
                if self.eta_count:
                    self.refactor()
                    self.recompute_reduced_costs()
                    continue
                self.sealed[q] = True
                continue
            t_primal = remaining / abs(alpha[r])
            leaving = int(self.basis[r])
            x_q = self.nonbasic_value(q) + sigma * t_primal
            kern.update_basics(self.x_b, alpha, sigma, t_primal)
            self.d -= (self.d[q] / w[q]) * w
            self.d[q] = 0.0
            self.record_eta(alpha, r)
            self.basis[r] = q
            self.in_basis_pos[q] = r
            self.in_basis_pos[leaving] = -1
            self.status[q] = BASIC
            self.status[leaving] = AT_UPPER if leave_at_upper else AT_LOWER
            self.x_b[r] = x_q
            self.lb_b[r] = self.lb[q]
            self.ub_b[r] = self.ub[q]
            if self.eta_count >= _REFACTOR_EVERY:
                self.refactor()
                self.recompute_reduced_costs()
            self.iterations += 1
            if self.iterations > max_iter:
                return "stalled"

    def phase1_objective(self) -> float:
        art = self.basis >= self.nm
        if not art.any():
            return 0.0
        return float(self.x_b[art].sum())

    def expel_artificials(self) -> None:
        """Pivot zero-valued basic artificials out where a real column allows."""
        for pos in range(self.ws.m):
            col = int(self.basis[pos])
            if col < self.nm:
                continue
            rho = self.btran(_unit(self.ws.m, pos))
            row = self.ws.a_ext_t @ rho
            usable = (np.abs(row) > 1e-7) & (self.status[:self.nm] != BASIC)
            usable &= (self.ub[:self.nm] > self.lb[:self.nm]) & ~self.sealed
            cand = np.flatnonzero(usable)
            done = False
            for q in cand:
                alpha = self.ftran(self.column_dense(int(q)))
                if abs(alpha[pos]) > 100 * _PIVOT_TOL:
                    sigma = 1.0 if self.status[q] != AT_UPPER else -1.0
                    self.pivot(int(q), sigma, alpha, 0.0, pos, kern.KIND_LEAVE_LOWER)
                    done = True
                    break
            if not done:
                # dependent row: freeze the artificial at zero where it sits
                self.ub[col] = 0.0
                self.ub_b[pos] = 0.0

    def seal_artificials(self) -> None:
        self.ub[self.nm:] = 0.0
        art = self.basis >= self.nm
        self.ub_b[art] = 0.0

    # ---------------------------------------------------------------- results

    def full_solution(self) -> np.ndarray:
        x = self.nonbasic_values()
        real = self.basis < self.nm
        x[self.basis[real]] = self.x_b[real]
        return x

    def export_basis(self) -> Basis:
        return Basis(basic=self.basis.copy(), status=self.status.copy(),
                     art_sign=self.art_sign.copy())


def _unit(m: int, pos: int) -> np.ndarray:
    v = np.zeros(m)
    v[pos] = 1.0
    return v


def _concat_ranges(starts: np.ndarray, lens: np.ndarray) -> np.ndarray:
    """Concatenate arange(s, s + l) for each (s, l) pair, fully vectorized."""
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    keep = lens > 0
    starts = starts[keep].astype(np.int64)
    lens = lens[keep]
    steps = np.ones(total, dtype=np.int64)
    steps[0] = starts[0]
    heads = np.cumsum(lens)[:-1]
    steps[heads] = starts[1:] - (starts[:-1] + lens[:-1] - 1)
    return np.cumsum(steps)


def _finish(ws: LPWorkspace, st: _Simplex, status: str) -> LPResult:
    n = ws.n
    if status != OPTIMAL:
        return LPResult(status=status, objective=np.nan,
                        x=np.zeros(n), duals=np.zeros(ws.m),
                        reduced_costs=np.zeros(n), iterations=st.iterations,
                        basis=None)
    if st.eta_count:
        st.refactor()
        st.recompute_reduced_costs()
    x_full = st.full_solution()
    x = x_full[:n].copy()
    objective = float(ws.model.obj @ x) + ws.model.obj_const
    return LPResult(status=OPTIMAL, objective=objective, x=x,
                    duals=st.duals(), reduced_costs=st.d[:n].copy(),
                    iterations=st.iterations, basis=st.export_basis())


def _push_repair(st: _Simplex) -> bool:
    """Drive out-of-bound basics to their bounds with push phases.

    Fallback warm-start path when the adopted basis is not dual feasible;
    returns False when some violated variable provably cannot reach its
    bound (the LP is infeasible).
    """
    feas = st.tol.feasibility
    bad = np.flatnonzero((st.x_b < st.lb_b - feas) | (st.x_b > st.ub_b + feas))
    if not bad.size:
        return True
    pushes = []
    for pos in bad:
        col = int(st.basis[pos])
        val = float(st.x_b[pos])
        lo, hi = float(st.lb[col]), float(st.ub[col])
        if val > hi:
            target, direction = hi, -1.0
            st.lb[col], st.ub[col] = hi, val
        else:
            target, direction = lo, 1.0
            st.lb[col], st.ub[col] = val, lo
        st.lb_b[pos], st.ub_b[pos] = st.lb[col], st.ub[col]
        pushes.append((col, target, direction, lo, hi))
    for col, target, direction, lo, hi in sorted(pushes):
        if not st.push_reached(col, target, direction):
            st.set_phase_costs(0, push_col=col, push_sign=-direction)
            outcome = st.run_phase(stop_col=col, stop_target=target,
                                   stop_dir=direction)
            if outcome == UNBOUNDED or not st.push_reached(col, target, direction):
                return False
        # Restore the true bounds.  A column that left the basis did so at
        # the push target, i.e. at its true upper bound when pushed down and
        # at its true lower bound when pushed up.
        st.lb[col], st.ub[col] = lo, hi
        pos = st.in_basis_pos[col]
        if pos >= 0:
            st.lb_b[pos], st.ub_b[pos] = lo, hi
        else:
            st.status[col] = AT_UPPER if direction < 0 else AT_LOWER
    return True


def solve_prepared(ws: LPWorkspace, lb_override=None, ub_override=None,
                   start: Basis | None = None,
                   tol: LPTolerances = LPTolerances(), log=None) -> LPResult:
    """Solve the LP relaxation over a prepared workspace.

    ``start`` warm-starts from a basis exported by an earlier solve of the
    same workspace (typically the parent node in branch and bound).  The
    adopted basis stays dual feasible after bound changes, so the warm path
    runs the dual simplex back to primal feasibility and polishes with the
    primal; bases with damaged reduced-cost signs fall back to primal push
    phases.  Bound overrides replace the structural bounds wholesale.
    """
    st = _Simplex(ws, lb_override, ub_override, tol, log)
    if start is None:
        if st.cold_start():
            st.set_phase_costs(1)
            outcome = st.run_phase()
            if outcome != OPTIMAL:  # phase 1 is bounded below by zero
                raise RuntimeError("phase 1 terminated " + outcome)
            if st.phase1_objective() > tol.feasibility:
                return _finish(ws, st, INFEASIBLE)
            st.expel_artificials()
            st.seal_artificials()
    else:
        bad = st.warm_start(start)
        if bad.size:
            st.set_phase_costs(2)
            outcome = st.run_dual() if st.dual_feasible() else "fallback"
            if outcome == INFEASIBLE:
                return _finish(ws, st, INFEASIBLE)
            if outcome != OPTIMAL and not _push_repair(st):
                return _finish(ws, st, INFEASIBLE)
    st.set_phase_costs(2)
    outcome = st.run_phase()
    if outcome == UNBOUNDED:
        return _finish(ws, st, UNBOUNDED)
    return _finish(ws, st, OPTIMAL)


def solve_lp(model: MILPModel, tol: LPTolerances = LPTolerances(),
             log=None) -> LPResult:
    """Two-phase primal simplex on the model with integrality relaxed.

    Returns status codes, never exceptions, for infeasible and unbounded
    instances; the result is deterministic for a fixed model.
    """
    return solve_prepared(LPWorkspace(model), tol=tol, log=log)


def dual_objective(model: MILPModel, duals: np.ndarray) -> float:
    """Bound-aware dual objective for the given row duals.

    Variable bounds are implicit constraints, so their multipliers (the sign
    parts of the reduced costs) enter the dual objective alongside
    ``rhs @ y``.
    """
    d = model.obj - model.a_matrix.T @ duals
    val = float(model.rhs @ duals) + model.obj_const
    pos = np.maximum(d, 0.0)
    neg = np.maximum(-d, 0.0)
    lb_term = np.where(pos > 1e-300, model.lb, 0.0)
    ub_term = np.where(neg > 1e-300, model.ub, 0.0)
    val += float(np.sum(pos * np.where(np.isfinite(lb_term), lb_term, 0.0)))
    val -= float(np.sum(neg * np.where(np.isfinite(ub_term), ub_term, 0.0)))
    return val


def verify_lp(model: MILPModel, result: LPResult, tol: float) -> bool:
    """Check primal feasibility and the weak-duality gap of an optimal result."""
    if result.status != OPTIMAL:
        raise ValueError("verify_lp expects an optimal result")
    x = result.x
    scale = np.maximum(1.0, np.abs(model.rhs))
    res = model.row_activities(x) - model.rhs
    if np.any(res[model.senses == -1] > tol * scale[model.senses == -1]):
        return False
    if np.any(res[model.senses == 1] < -tol * scale[model.senses == 1]):
        return False
    if np.any(np.abs(res[model.senses == 0]) > tol * scale[model.senses == 0]):
        return False
    bscale = np.where(np.isfinite(model.lb), np.abs(model.lb), 0.0)
    bscale = np.maximum(bscale, np.where(np.isfinite(model.ub), np.abs(model.ub), 0.0))
    bscale = np.maximum(1.0, bscale)
    if np.any(x < model.lb - tol * bscale) or np.any(x > model.ub + tol * bscale):
        return False
    dual = dual_objective(model, result.duals)
    return abs(result.objective - dual) <= tol * (1.0 + abs(result.objective))
