"""Solver-agnostic sparse MILP container.

A model is a list of bounded variables (continuous or binary), sparse linear
constraint rows, and a sparse minimization objective.  Models are built
through :class:`ModelBuilder` and frozen on ``build()``; the frozen arrays are
marked read-only so a model can be shared across threads and solver runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

CONTINUOUS = "continuous"
BINARY = "binary"

LE = "<="
EQ = "=="
GE = ">="

_SENSES = (LE, EQ, GE)


@dataclass(frozen=True)
class MILPModel:
    """Frozen sparse model: minimize obj @ x + obj_const subject to rows/bounds."""

    names: tuple
    is_binary: np.ndarray  # bool, (n,)
    lb: np.ndarray  # (n,)
    ub: np.ndarray  # (n,)
    a_matrix: sp.csr_matrix  # (m, n)
    senses: np.ndarray  # int8, (m,): -1 for <=, 0 for ==, +1 for >=
    rhs: np.ndarray  # (m,)
    row_names: tuple
    obj: np.ndarray  # (n,)
    obj_const: float = 0.0

    @property
    def num_variables(self) -> int:
        return self.lb.shape[0]

    @property
    def num_constraints(self) -> int:
        return self.rhs.shape[0]

    @property
    def num_binaries(self) -> int:
        return int(self.is_binary.sum())

    def binary_indices(self) -> np.ndarray:
        return np.flatnonzero(self.is_binary)

    def validate(self) -> list[str]:
        """Return a list of invariant violations (empty when well formed)."""
        problems = []
        n = self.num_variables
        if np.any(self.lb > self.ub + 1e-12):
            bad = np.flatnonzero(self.lb > self.ub + 1e-12)
            problems.append(f"lower bound above upper bound for variables {bad.tolist()}")
        binaries = self.binary_indices()
        if binaries.size:
            if np.any(self.lb[binaries] < -1e-12) or np.any(self.ub[binaries] > 1 + 1e-12):
                problems.append("binary variable bounds outside [0, 1]")
        if self.a_matrix.shape != (self.num_constraints, n):
            problems.append("constraint matrix shape mismatch")
        elif self.a_matrix.nnz:
            if self.a_matrix.indices.max(initial=0) >= n:
                problems.append("constraint references a nonexistent variable")
        if not np.all(np.isin(self.senses, (-1, 0, 1))):
            problems.append("unknown row sense")
        if self.obj.shape != (n,):
            problems.append("objective length mismatch")
        return problems

    def evaluate_objective(self, x: np.ndarray) -> float:
        return float(self.obj @ x) + self.obj_const

    def row_activities(self, x: np.ndarray) -> np.ndarray:
        return self.a_matrix @ x


_SENSE_CODE = {LE: -1, EQ: 0, GE: 1}
_SENSE_TEXT = {-1: LE, 0: EQ, 1: GE}


@dataclass
class ModelBuilder:
    """Incrementally assembles a :class:`MILPModel` from variables and rows."""

    _names: list = field(default_factory=list)
    _kinds: list = field(default_factory=list)
    _lb: list = field(default_factory=list)
    _ub: list = field(default_factory=list)
    _rows_idx: list = field(default_factory=list)
    _rows_val: list = field(default_factory=list)
    _senses: list = field(default_factory=list)
    _rhs: list = field(default_factory=list)
    _row_names: list = field(default_factory=list)
    _obj: dict = field(default_factory=dict)
    _obj_const: float = 0.0

    def add_variable(self, name: str, kind: str = CONTINUOUS,
                     lb: float = 0.0, ub: float = np.inf) -> int:
        if kind not in (CONTINUOUS, BINARY):
            raise ValueError(f"unknown variable kind {kind!r}")
        if kind == BINARY:
            lb = max(0.0, float(lb))
            ub = min(1.0, float(ub))
        if lb > ub:
            raise ValueError(f"variable {name!r}: lower bound {lb} exceeds upper bound {ub}")
        idx = len(self._names)
        self._names.append(name)
        self._kinds.append(kind)
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        return idx

    def add_constraint(self, coeffs, sense: str, rhs: float, name: str = "") -> int:
        """coeffs is an iterable of (variable index, coefficient) pairs."""
        if sense not in _SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        idx_list, val_list = [], []
        for j, v in coeffs:
            if not 0 <= j < len(self._names):
                raise ValueError(f"constraint {name!r} references unknown variable {j}")
            if v != 0.0:
                idx_list.append(j)
                val_list.append(float(v))
        row = len(self._rhs)
        self._rows_idx.append(np.asarray(idx_list, dtype=np.int64))
        self._rows_val.append(np.asarray(val_list, dtype=np.float64))
        self._senses.append(_SENSE_CODE[sense])
        self._rhs.append(float(rhs))
        self._row_names.append(name or f"r{row}")
        return row

    def add_objective_term(self, var: int, coeff: float) -> None:
        if coeff:
            self._obj[var] = self._obj.get(var, 0.0) + float(coeff)

    def add_objective_constant(self, value: float) -> None:
        self._obj_const += float(value)

    def set_bounds(self, var: int, lb: float, ub: float) -> None:
        self._lb[var] = float(lb)
        self._ub[var] = float(ub)

    @property
    def num_variables(self) -> int:
        return len(self._names)

    def build(self) -> MILPModel:
        n = len(self._names)
        m = len(self._rhs)
        indptr = np.zeros(m + 1, dtype=np.int64)
        for r, idx in enumerate(self._rows_idx):
            indptr[r + 1] = indptr[r] + idx.size
        indices = (np.concatenate(self._rows_idx) if m else np.empty(0, dtype=np.int64))
        data = (np.concatenate(self._rows_val) if m else np.empty(0, dtype=np.float64))
        a_matrix = sp.csr_matrix((data, indices, indptr), shape=(m, n))
        a_matrix.sum_duplicates()
        obj = np.zeros(n)
        for j, v in self._obj.items():
            obj[j] = v
        is_binary = np.asarray([k == BINARY for k in self._kinds], dtype=bool)
        lb = np.asarray(self._lb, dtype=np.float64)
        ub = np.asarray(self._ub, dtype=np.float64)
        for arr in (is_binary, lb, ub, obj):
            arr.setflags(write=False)
        senses = np.asarray(self._senses, dtype=np.int8)
        rhs = np.asarray(self._rhs, dtype=np.float64)
        senses.setflags(write=False)
        rhs.setflags(write=False)
        model = MILPModel(
            names=tuple(self._names),
            is_binary=is_binary,
            lb=lb,
            ub=ub,
            a_matrix=a_matrix,
            senses=senses,
            rhs=rhs,
            row_names=tuple(self._row_names),
            obj=obj,
            obj_const=self._obj_const,
        )
        problems = model.validate()
        if problems:
            raise ValueError("model invariants violated: " + "; ".join(problems))
        return model


def _format_term(coeff: float, name: str, first: bool) -> str:
    sign = "-" if coeff < 0 else ("" if first else "+")
    return f"{sign} {abs(coeff):.17g} {name} "


def write_lp_text(model: MILPModel) -> str:
    """Render the model in LP interchange text (minimize section, rows, bounds).

    Used to cross-check formulations against external tools during development.
    """
    out = ["\\ stochuc model dump", "Minimize", " obj:"]
    parts = []
    first = True
    for j in np.flatnonzero(model.obj):
        parts.append(_format_term(model.obj[j], model.names[j], first))
        first = False
    if model.obj_const:
        parts.append(_format_term(model.obj_const, "one_const", first))
    out.append("  " + "".join(parts))
    out.append("Subject To")
    a_csr = model.a_matrix
    rel = {-1: "<=", 0: "=", 1: ">="}
    for r in range(model.num_constraints):
        lo, hi = a_csr.indptr[r], a_csr.indptr[r + 1]
        terms = []
        first = True
        for k in range(lo, hi):
            terms.append(_format_term(a_csr.data[k], model.names[a_csr.indices[k]], first))
            first = False
        if first:  # empty row
            terms.append("0 one_const ")
        out.append(f" {model.row_names[r]}: " + "".join(terms)
                   + f"{rel[int(model.senses[r])]} {model.rhs[r]:.17g}")
    out.append("Bounds")
    for j, name in enumerate(model.names):
        lb, ub = model.lb[j], model.ub[j]
        lo = "-inf" if np.isneginf(lb) else f"{lb:.17g}"
        hi = "+inf" if np.isposinf(ub) else f"{ub:.17g}"
        out.append(f" {lo} <= {name} <= {hi}")
    if model.obj_const:
        out.append(" one_const = 1")
    binaries = [model.names[j] for j in model.binary_indices()]
    if binaries:
        out.append("Binaries")
        out.extend(" " + b for b in binaries)
    out.append("End")
    return "\n".join(out) + "\n"


def write_lp(model: MILPModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_lp_text(model))
