# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled dual-ascent kernel.

Same iteration as ``_dualcore_py.solve_dual`` (projected gradient ascent
with Armijo backtracking on the concave dual of the multicarrier transmit
QCQP); keep the two implementations in lockstep.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef double _value(const double[:, ::1] gain_sq, const double[::1] budgets,
                   const double[::1] inv_lam, const double[::1] lam) nogil:
    cdef Py_ssize_t K = gain_sq.shape[0]
    cdef Py_ssize_t n = gain_sq.shape[1]
    cdef Py_ssize_t k, i
    cdef double s, total = 0.0
    for k in range(K):
        s = 0.0
        for i in range(n):
            s += gain_sq[k, i] * inv_lam[i]
        total -= s / (1.0 + s)
    for i in range(n):
        total -= lam[i] * budgets[i]
    return total


cdef double _value_and_grad(const double[:, ::1] gain_sq, const double[::1] budgets,
                            const double[::1] inv_lam, const double[::1] lam,
                            double[::1] grad) nogil:
    cdef Py_ssize_t K = gain_sq.shape[0]
    cdef Py_ssize_t n = gain_sq.shape[1]
    cdef Py_ssize_t k, i
    cdef double s, denom, total = 0.0
    for i in range(n):
        grad[i] = 0.0
    for k in range(K):
        s = 0.0
        for i in range(n):
            s += gain_sq[k, i] * inv_lam[i]
        total -= s / (1.0 + s)
        denom = (1.0 + s) * (1.0 + s)
        for i in range(n):
            grad[i] += gain_sq[k, i] / denom
    for i in range(n):
        grad[i] = grad[i] * inv_lam[i] * inv_lam[i] - budgets[i]
        total -= lam[i] * budgets[i]
    return total


def solve_dual(gain_sq, budgets, lam0, int max_iterations, double grad_tol,
               double lam_floor, double armijo_c, int max_backtracks):
    """See ``_dualcore_py.solve_dual``; identical contract and iteration."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] A = np.ascontiguousarray(gain_sq, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] p = np.asarray(budgets, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] lam = np.maximum(np.asarray(lam0, dtype=np.float64), lam_floor)

    cdef Py_ssize_t n = A.shape[1]
    cdef cnp.ndarray[double, ndim=1] grad = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] cand = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] inv_lam = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] cand_inv = np.empty(n)

    cdef double[:, ::1] A_v = A
    cdef double[::1] p_v = p
    cdef double[::1] lam_v = lam
    cdef double[::1] grad_v = grad
    cdef double[::1] cand_v = cand
    cdef double[::1] inv_v = inv_lam
    cdef double[::1] cand_inv_v = cand_inv

    cdef Py_ssize_t i
    cdef int it, bt, iterations = 0
    cdef bint converged = False, accepted
    cdef double value, cand_value, alpha, ascent, pg, max_pg, step

    for i in range(n):
        inv_v[i] = 1.0 / lam_v[i]
    value = _value_and_grad(A_v, p_v, inv_v, lam_v, grad_v)

    for it in range(1, max_iterations + 1):
        iterations = it
        max_pg = 0.0
        for i in range(n):
            pg = grad_v[i]
            if lam_v[i] <= lam_floor and pg < 0.0:
                pg = 0.0
            if pg < 0.0:
                pg = -pg
            if pg > max_pg:
                max_pg = pg
        if max_pg < grad_tol:
            converged = True
            break

        alpha = 1.0
        accepted = False
        for bt in range(max_backtracks):
            ascent = 0.0
            for i in range(n):
                step = lam_v[i] + alpha * grad_v[i]
                if step < lam_floor:
                    step = lam_floor
                cand_v[i] = step
                cand_inv_v[i] = 1.0 / step
                ascent += grad_v[i] * (step - lam_v[i])
            cand_value = _value(A_v, p_v, cand_inv_v, cand_v)
            if ascent > 0.0 and cand_value >= value + armijo_c * ascent:
                for i in range(n):
                    lam_v[i] = cand_v[i]
                    inv_v[i] = cand_inv_v[i]
                value = _value_and_grad(A_v, p_v, inv_v, lam_v, grad_v)
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break

    return lam, value, grad, iterations, bool(converged)
