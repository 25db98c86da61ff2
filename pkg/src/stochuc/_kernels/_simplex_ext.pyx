# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simplex hot kernels; semantics mirror `pure.py` exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

KIND_LEAVE_LOWER = 0
KIND_LEAVE_UPPER = 1
KIND_BOUND_FLIP = 2
KIND_UNBOUNDED = -1

cdef double _INF = float("inf")


def apply_etas_forward(cnp.int64_t[:] eta_rows, cnp.float64_t[:, :] eta_mat,
                       Py_ssize_t count, cnp.float64_t[:] x):
    """Apply `count` product-form updates to x in place (FTRAN tail)."""
    cdef Py_ssize_t i, j, r, m = x.shape[0]
    cdef double t
    for i in range(count):
        r = eta_rows[i]
        t = x[r]
        if t != 0.0:
            x[r] = 0.0
            for j in range(m):
                x[j] += eta_mat[i, j] * t


def apply_etas_transposed(cnp.int64_t[:] eta_rows, cnp.float64_t[:, :] eta_mat,
                          Py_ssize_t count, cnp.float64_t[:] y):
    """Apply the transposed updates in reverse order (BTRAN head)."""
    cdef Py_ssize_t i, j, m = y.shape[0]
    cdef double acc
    for i in range(count - 1, -1, -1):
        acc = 0.0
        for j in range(m):
            acc += eta_mat[i, j] * y[j]
        y[eta_rows[i]] = acc


def ratio_test(cnp.float64_t[:] x_b, cnp.float64_t[:] lb_b, cnp.float64_t[:] ub_b,
               cnp.float64_t[:] alpha, double sigma, double bound_gap,
               double pivot_tol, bint bland, cnp.int64_t[:] var_ids):
    """Bounded-variable ratio test; see the pure twin for the contract."""
    cdef Py_ssize_t i, m = x_b.shape[0]
    cdef double rate, num, ratio, t_row = _INF
    cdef double best_alpha = -1.0
    cdef double threshold
    cdef Py_ssize_t pos = -1
    cdef int kind
    cdef cnp.int64_t best_id = 0
    # first pass: minimum ratio
    for i in range(m):
        rate = -sigma * alpha[i]
        if rate < -pivot_tol:
            num = x_b[i] - lb_b[i]
            if num < 0.0:
                num = 0.0
            ratio = num / (-rate)
        elif rate > pivot_tol:
            num = ub_b[i] - x_b[i]
            if num < 0.0:
                num = 0.0
            ratio = num / rate
        else:
            continue
        if ratio < t_row:
            t_row = ratio
    if t_row != _INF:
        if bland:
            for i in range(m):
                rate = -sigma * alpha[i]
                if rate < -pivot_tol:
                    num = x_b[i] - lb_b[i]
                    if num < 0.0:
                        num = 0.0
                    ratio = num / (-rate)
                elif rate > pivot_tol:
                    num = ub_b[i] - x_b[i]
                    if num < 0.0:
                        num = 0.0
                    ratio = num / rate
                else:
                    continue
                if ratio <= t_row and (pos < 0 or var_ids[i] < best_id):
                    pos = i
                    best_id = var_ids[i]
        else:
            threshold = t_row * (1.0 + 1e-9) + 1e-12
            for i in range(m):
                rate = -sigma * alpha[i]
                if rate < -pivot_tol:
                    num = x_b[i] - lb_b[i]
                    if num < 0.0:
                        num = 0.0
                    ratio = num / (-rate)
                elif rate > pivot_tol:
                    num = ub_b[i] - x_b[i]
                    if num < 0.0:
                        num = 0.0
                    ratio = num / rate
                else:
                    continue
                if ratio <= threshold:
                    if alpha[i] < 0.0:
                        num = -alpha[i]
                    else:
                        num = alpha[i]
                    if num > best_alpha:
                        best_alpha = num
                        pos = i
        if pos >= 0:
            rate = -sigma * alpha[pos]
            if rate < -pivot_tol:
                num = x_b[pos] - lb_b[pos]
                if num < 0.0:
                    num = 0.0
                t_row = num / (-rate)
            else:
                num = ub_b[pos] - x_b[pos]
                if num < 0.0:
                    num = 0.0
                t_row = num / rate
    if bound_gap <= t_row and bound_gap != _INF:
        return bound_gap, -1, KIND_BOUND_FLIP
    if pos < 0:
        return _INF, -1, KIND_UNBOUNDED
    rate = -sigma * alpha[pos]
    kind = KIND_LEAVE_LOWER if rate < 0.0 else KIND_LEAVE_UPPER
    return t_row, pos, kind


def update_basics(cnp.float64_t[:] x_b, cnp.float64_t[:] alpha, double sigma,
                  double t):
    """Move basic values one step: x_B -= sigma * t * alpha (in place)."""
    cdef Py_ssize_t i, m = x_b.shape[0]
    cdef double step = sigma * t
    if t != 0.0:
        for i in range(m):
            x_b[i] -= step * alpha[i]
