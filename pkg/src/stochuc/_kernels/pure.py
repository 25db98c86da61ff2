"""Pure NumPy implementations of the simplex hot kernels.

Semantics must match the compiled extension in `_simplex_ext` exactly; the
test suite cross-checks the two on random inputs and the benchmark script
compares their throughput.
"""

from __future__ import annotations

import numpy as np

KIND_LEAVE_LOWER = 0
KIND_LEAVE_UPPER = 1
KIND_BOUND_FLIP = 2
KIND_UNBOUNDED = -1


def apply_etas_forward(eta_rows: np.ndarray, eta_mat: np.ndarray, count: int,
                       x: np.ndarray) -> None:
    """Apply `count` product-form updates to x in place (FTRAN tail).

    Update i scales x[r] by eta[r] and adds eta * x_old[r] elsewhere, which is
    the combined form ``t = x[r]; x[r] = 0; x += eta_i * t``.
    """
    for i in range(count):
        r = eta_rows[i]
        t = x[r]
        if t != 0.0:
            x[r] = 0.0
            x += eta_mat[i] * t


def apply_etas_transposed(eta_rows: np.ndarray, eta_mat: np.ndarray, count: int,
                          y: np.ndarray) -> None:
    """Apply the transposed updates in reverse order (BTRAN head)."""
    for i in range(count - 1, -1, -1):
        y[eta_rows[i]] = float(eta_mat[i] @ y)


def ratio_test(x_b: np.ndarray, lb_b: np.ndarray, ub_b: np.ndarray,
               alpha: np.ndarray, sigma: float, bound_gap: float,
               pivot_tol: float, bland: bool, var_ids: np.ndarray):
    """Bounded-variable ratio test.

    The entering variable moves by t >= 0 in direction sigma; basic value i
    changes at rate -sigma * alpha[i].  Returns (t, position, kind) where kind
    says whether a basic leaves at its lower/upper bound, the entering
    variable flips to its opposite bound, or the step is unbounded.
    """
    rate = -sigma * alpha
    dec = rate < -pivot_tol
    inc = rate > pivot_tol
    ratios = np.full(x_b.shape[0], np.inf)
    if dec.any():
        num = x_b[dec] - lb_b[dec]
        np.maximum(num, 0.0, out=num)
        ratios[dec] = num / -rate[dec]
    if inc.any():
        num = ub_b[inc] - x_b[inc]
        np.maximum(num, 0.0, out=num)
        ratios[inc] = num / rate[inc]
    pos = -1
    t_row = np.inf
    if np.isfinite(ratios).any():
        t_row = float(ratios.min())
        if bland:
            cand = np.flatnonzero(ratios <= t_row)
            pos = int(cand[np.argmin(var_ids[cand])])
        else:
            cand = np.flatnonzero(ratios <= t_row * (1.0 + 1e-9) + 1e-12)
            pos = int(cand[np.argmax(np.abs(alpha[cand]))])
        t_row = float(ratios[pos])
    if bound_gap <= t_row and np.isfinite(bound_gap):
        return float(bound_gap), -1, KIND_BOUND_FLIP
    if pos < 0:
        return np.inf, -1, KIND_UNBOUNDED
    kind = KIND_LEAVE_LOWER if rate[pos] < 0.0 else KIND_LEAVE_UPPER
    return t_row, pos, kind


def update_basics(x_b: np.ndarray, alpha: np.ndarray, sigma: float, t: float) -> None:
    """Move basic values one step: x_B -= sigma * t * alpha (in place)."""
    if t != 0.0:
        x_b -= (sigma * t) * alpha
