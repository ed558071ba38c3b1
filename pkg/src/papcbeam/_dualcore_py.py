"""Pure-numpy dual-ascent kernel (fallback for the compiled extension).

Maximizes the concave dual of the multicarrier transmit QCQP over the
multiplier orthant by projected gradient ascent with an Armijo
backtracking line search.  The compiled kernel in ``_dualcore.pyx``
implements the identical iteration; keep the two in lockstep.

All inputs are real: ``gain_sq[k, i]`` is the squared magnitude of the
effective MISO channel of carrier ``k`` at antenna ``i``.
"""

import numpy as np


def _value(gain_sq: np.ndarray, budgets: np.ndarray, lam: np.ndarray) -> float:
    s = gain_sq @ (1.0 / lam)
    return float(-np.sum(s / (1.0 + s)) - lam @ budgets)


def _value_and_grad(gain_sq, budgets, lam):
    inv = 1.0 / lam
    s = gain_sq @ inv
    value = float(-np.sum(s / (1.0 + s)) - lam @ budgets)
    # d/dlam_i = sum_k |z*_{k,i}|^2 - p_i at the Lagrangian minimizer
    grad = inv**2 * (gain_sq / (1.0 + s)[:, None] ** 2).sum(axis=0) - budgets
    return value, grad


def solve_dual(
    gain_sq: np.ndarray,
    budgets: np.ndarray,
    lam0: np.ndarray,
    max_iterations: int,
    grad_tol: float,
    lam_floor: float,
    armijo_c: float,
    max_backtracks: int,
):
    """Projected gradient ascent on the dual; see module docstring.

    Returns ``(lam, value, grad, iterations, converged)`` where ``value``
    and ``grad`` are evaluated at the returned ``lam``.  ``converged`` is
    true when the sup-norm of the projected gradient fell below
    ``grad_tol``; otherwise the best (last) iterate is returned.
    """
    gain_sq = np.ascontiguousarray(gain_sq, dtype=float)
    budgets = np.asarray(budgets, dtype=float)
    lam = np.maximum(np.asarray(lam0, dtype=float), lam_floor)

    value, grad = _value_and_grad(gain_sq, budgets, lam)
    iterations = 0
    converged = False
    for iterations in range(1, max_iterations + 1):
        pg = np.where(lam > lam_floor, grad, np.maximum(grad, 0.0))
        if np.abs(pg).max() < grad_tol:
            converged = True
            break
        alpha = 1.0
        accepted = False
        for _ in range(max_backtracks):
            cand = np.maximum(lam + alpha * grad, lam_floor)
            cand_value = _value(gain_sq, budgets, cand)
            ascent = float(grad @ (cand - lam))
            if ascent > 0.0 and cand_value >= value + armijo_c * ascent:
                lam = cand
                value, grad = _value_and_grad(gain_sq, budgets, lam)
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # no ascent step representable at this precision
            break
    return lam, value, grad, iterations, converged
