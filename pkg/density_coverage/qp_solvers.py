"""
    File: qp_solvers.py
    Date: October 17, 2026

    Solvers for the strictly convex box-constrained quadratic program

        minimize  1/2 x^T H x + f^T x   subject to  lo <= x <= hi.

    The primary method is a primal active-set method with Cholesky solves on the free
    variables. When the working set cycles, or the result misses the KKT tolerance, the
    solver falls back to projected gradient with Nesterov acceleration.
"""

import logging
import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

KKT_TOL = 1e-8


class BoxQpResult(object):
    """
    The solution of a box QP together with its KKT certificate.

    Attributes:
        x (np.ndarray): The minimizer.
        lam_upper (np.ndarray): Multipliers of the upper bounds (>= 0).
        lam_lower (np.ndarray): Multipliers of the lower bounds (>= 0).
        kkt_residual (float): Max of the stationarity, complementarity and feasibility residuals.
        at_lower, at_upper (np.ndarray): Indices of the active bounds.
        iterations (int): Iterations used by the method that produced ``x``.
        method (str): ``"active_set"`` or ``"projected_gradient"``.
    """

    def __init__(self, x, lam_upper, lam_lower, kkt_residual, at_lower, at_upper, iterations, method):
        self.x = x
        self.lam_upper = lam_upper
        self.lam_lower = lam_lower
        self.kkt_residual = kkt_residual
        self.at_lower = at_lower
        self.at_upper = at_upper
        self.iterations = iterations
        self.method = method

    @property
    def active_bounds(self):
        return tuple(sorted(self.at_lower.tolist() + self.at_upper.tolist()))

    def __repr__(self):
        return f"BoxQpResult(method={self.method}, iterations={self.iterations}, kkt_residual={self.kkt_residual:.3g})"


def kkt_certificate(H, f, x, lo, hi):
    """
    Multipliers and the KKT residual of a candidate point ``x``; the conditions are

        H x + f + lam_upper - lam_lower = 0,  lam >= 0,  lam_upper (hi - x) = 0,  lam_lower (x - lo) = 0.

    Returns:
        tuple: (lam_upper, lam_lower, residual, at_lower, at_upper)
    """
    g = H @ x + f
    atol_hi = 1e-12 * np.maximum(1.0, np.abs(hi))
    atol_lo = 1e-12 * np.maximum(1.0, np.abs(lo))
    upper = x >= hi - atol_hi
    lower = x <= lo + atol_lo
    lam_upper = np.where(upper, np.maximum(-g, 0.0), 0.0)
    lam_lower = np.where(lower, np.maximum(g, 0.0), 0.0)

    stationarity = np.abs(g + lam_upper - lam_lower).max(initial=0.0)
    complementarity = max(np.abs(lam_upper * (hi - x)).max(initial=0.0), np.abs(lam_lower * (x - lo)).max(initial=0.0))
    feasibility = max(np.maximum(lo - x, 0.0).max(initial=0.0), np.maximum(x - hi, 0.0).max(initial=0.0))
    residual = float(max(stationarity, complementarity, feasibility))
    return lam_upper, lam_lower, residual, np.flatnonzero(lower), np.flatnonzero(upper & ~lower)


def _active_set(H, f, lo, hi, max_iter):
    """Returns (x, iterations, converged)."""
    n = f.shape[0]
    # -1: fixed at lo, +1: fixed at hi, 0: free
    state = np.zeros(n, dtype=int)
    state[lo == hi] = -1
    x = np.clip(np.zeros(n), lo, hi)
    seen = set()

    for it in range(1, max_iter + 1):
        x[state == -1] = lo[state == -1]
        x[state == 1] = hi[state == 1]
        free = np.flatnonzero(state == 0)

        if free.size > 0:
            fixed = np.flatnonzero(state != 0)
            rhs = -(f[free] + H[np.ix_(free, fixed)] @ x[fixed])
            target = scipy.linalg.cho_solve(scipy.linalg.cho_factor(H[np.ix_(free, free)]), rhs)
            p = target - x[free]

            step, block, side = 1.0, None, 0
            for j in range(free.size):
                if p[j] > 0:
                    t = (hi[free[j]] - x[free[j]]) / p[j]
                    if t < step:
                        step, block, side = max(t, 0.0), j, 1
                elif p[j] < 0:
                    t = (lo[free[j]] - x[free[j]]) / p[j]
                    if t < step:
                        step, block, side = max(t, 0.0), j, -1

            x[free] = x[free] + step * p
            if block is not None:
                state[free[block]] = side
                continue

        g = H @ x + f
        releasable = (state != 0) & (lo < hi)
        if not releasable.any():
            return x, it, True
        mult = np.where(state == 1, -g, g)
        mult = np.where(releasable, mult, np.inf)
        worst = int(np.argmin(mult))
        if mult[worst] >= -1e-14 * max(1.0, np.abs(g).max()):
            return x, it, True

        state[worst] = 0
        signature = tuple(state)
        if signature in seen:
            logger.warning("Active set cycled after %d iterations; switching to projected gradient.", it)
            return x, it, False
        seen.add(signature)

    return x, max_iter, False


def projected_gradient(H, f, lo, hi, x0=None, max_iter=1_000_000, tol=1e-13):
    """
    Projected gradient with Nesterov acceleration and adaptive restart.

    Returns:
        tuple: (x, iterations)
    """
    n = f.shape[0]
    L = float(np.linalg.eigvalsh(H).max())
    step = 1.0 / L if L > 0 else 1.0
    x = np.clip(np.zeros(n) if x0 is None else np.asarray(x0, dtype=float), lo, hi)
    y = x.copy()
    t = 1.0

    for it in range(1, max_iter + 1):
        x_new = np.clip(y - step * (H @ y + f), lo, hi)
        if np.dot(x_new - x, H @ (x_new + x) / 2 + f) > 0:
            # objective went up: restart momentum
            y, t = x.copy(), 1.0
            continue
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        y = x_new + ((t - 1) / t_new) * (x_new - x)
        gap = np.linalg.norm(x_new - np.clip(x_new - step * (H @ x_new + f), lo, hi)) / step
        x, t = x_new, t_new
        if gap <= tol * (1 + np.linalg.norm(f)):
            return x, it
    return x, max_iter


def box_qp(H, f, lo, hi, max_iter=None, tol=KKT_TOL):
    """
    Minimizes 1/2 x^T H x + f^T x over the box lo <= x <= hi for symmetric positive-definite H.

    Args:
        H (np.ndarray): Symmetric positive-definite Hessian.
        f (np.ndarray): Linear term.
        lo, hi (np.ndarray): Box bounds.
        max_iter (int, optional): Active-set iteration cap. Defaults to 10 n + 20.
        tol (float): KKT residual the active-set result must meet before it is accepted.

    Returns:
        BoxQpResult
    """
    H = np.asarray(H, dtype=float)
    f = np.asarray(f, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = f.shape[0]
    assert H.shape == (n, n), "H must be square and conformable with f."
    assert lo.shape == hi.shape == (n,), "Bounds must be conformable with f."
    assert np.all(lo <= hi), "Infeasible box: a lower bound exceeds its upper bound."

    max_iter = 10 * n + 20 if max_iter is None else max_iter
    x, iterations, converged = _active_set(H, f, lo, hi, max_iter)
    method = "active_set"
    lam_upper, lam_lower, residual, at_lower, at_upper = kkt_certificate(H, f, x, lo, hi)

    if not converged or residual > tol:
        logger.debug("Active-set result has KKT residual %.3g; refining with projected gradient.", residual)
        x, iterations = projected_gradient(H, f, lo, hi, x0=x)
        method = "projected_gradient"
        lam_upper, lam_lower, residual, at_lower, at_upper = kkt_certificate(H, f, x, lo, hi)

    return BoxQpResult(x, lam_upper, lam_lower, residual, at_lower, at_upper, iterations, method)
