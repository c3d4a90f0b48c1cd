"""
    File: mpc.py
    Date: October 17, 2026

    The Wasserstein-cost quadratic program and the receding-horizon step.

    For an agent with prediction matrices (Theta, Phi), per-step transport weights
    s_h = sqrt(sum_j pi_j) and stacked targets Q_bar, the expected local transport cost
    over the horizon is, up to terms constant in U,

        U^T Hmat U + 2 f^T U,   Hmat = (Omega Theta)^T (Omega Theta) + R,
                                f    = (Omega Theta)^T Omega (Phi mu - Q_bar).
"""

import logging
import numpy as np
import scipy.linalg
from density_coverage.lti_model import noise_covariance_h
from density_coverage.qp_solvers import box_qp

logger = logging.getLogger(__name__)

DEFAULT_R_SCALE = 0.01
CONSTRAINT_MODES = ("none", "box", "ball")


class OmegaWeights(object):
    """
    Per-step output weights s_h >= 0; Omega applies s_h I_d to output block h.
    """

    def __init__(self, scales):
        self.scales = np.asarray(scales, dtype=float)
        assert np.all(self.scales >= 0), "Omega weights must be nonnegative."

    @classmethod
    def from_masses(cls, masses):
        """Weights from the total transported mass of each step."""
        return cls(np.sqrt(np.maximum(np.asarray(masses, dtype=float), 0.0)))

    @classmethod
    def zeros(cls, H):
        return cls(np.zeros(H))

    @property
    def H(self):
        return self.scales.shape[0]

    def matrix(self, d):
        """The block-diagonal (dH) x (dH) matrix Omega."""
        return np.kron(np.diag(self.scales), np.eye(d))


class QpProblem(object):
    """
    The strictly convex program min U^T Hmat U + 2 f^T U subject to the configured input set.

    Attributes:
        Hmat (np.ndarray): (mH) x (mH) symmetric positive-definite Hessian.
        f (np.ndarray): Linear term.
        u_min, u_max (np.ndarray or None): Per-step box bounds.
        ball_radius (float or None): Per-step Euclidean bound.
        H (int): Horizon.
        m (int): Input dimension.
        tracking_constant (float): ||Omega (Phi mu - Q_bar)||^2.
        trace_term (float): sum_h s_h^2 tr(Cov(y at k+r+h)).
        spread_term (float): sum over steps of sum_j pi_j ||q_j - q_bar||^2.
    """

    def __init__(self, Hmat, f, H, m, u_min=None, u_max=None, ball_radius=None,
                 tracking_constant=0.0, trace_term=0.0, spread_term=0.0):
        assert u_min is None or ball_radius is None, "Box and ball constraints cannot be combined."
        self.Hmat = Hmat
        self.f = f
        self.H = H
        self.m = m
        self.u_min = None if u_min is None else np.asarray(u_min, dtype=float)
        self.u_max = None if u_max is None else np.asarray(u_max, dtype=float)
        self.ball_radius = ball_radius
        self.tracking_constant = tracking_constant
        self.trace_term = trace_term
        self.spread_term = spread_term

    @property
    def mode(self):
        if self.u_min is not None:
            return "box"
        if self.ball_radius is not None:
            return "ball"
        return "none"

    @property
    def constant(self):
        """All terms of the expected cost that do not depend on U."""
        return self.tracking_constant + self.trace_term + self.spread_term

    def objective(self, U):
        U = np.asarray(U, dtype=float)
        return float(U @ self.Hmat @ U + 2 * self.f @ U)

    def expected_cost(self, U):
        """The expected transport cost plus input regularization at U."""
        return self.objective(U) + self.constant

    def stacked_bounds(self):
        return np.tile(self.u_min, self.H), np.tile(self.u_max, self.H)


class ControlSolution(object):
    """
    The solution of a QpProblem.

    Attributes:
        U (np.ndarray): The optimal input stack.
        kkt_residual (float): KKT residual (gradient norm when unconstrained).
        active_bounds (tuple): Indices of U at a bound.
        objective (float): U^T Hmat U + 2 f^T U at U.
        lam_upper, lam_lower (np.ndarray or None): Box multipliers.
        method (str): Solver used.
    """

    def __init__(self, U, kkt_residual, active_bounds, objective, lam_upper=None, lam_lower=None, method=""):
        self.U = U
        self.kkt_residual = kkt_residual
        self.active_bounds = active_bounds
        self.objective = objective
        self.lam_upper = lam_upper
        self.lam_lower = lam_lower
        self.method = method

    def first_input(self, m):
        return self.U[:m].copy()

    def __repr__(self):
        return f"ControlSolution(objective={self.objective:.6g}, kkt_residual={self.kkt_residual:.3g}, method={self.method})"


def default_R(m, H, scale=DEFAULT_R_SCALE):
    """The input regularization scale * I_{mH}."""
    assert scale > 0, "The regularization scale must be positive."
    return scale * np.eye(m * H)


def output_noise_covariance(model, r, H):
    """
    Covariances of the measured outputs at k+r, ..., k+r+H-1 given the mean state at k,

        C Sigma_(r+h) C^T + Sigma_v,

    stacked into an H x d x d array.
    """
    assert r >= 1 and H >= 1, "r and H must be positive integers."
    C = model.C
    return np.stack([C @ noise_covariance_h(model, r + h) @ C.T + model.Sigma_v for h in range(H)])


def build_qp(pred, omega, mu, Q_bar, R, u_min=None, u_max=None, ball_radius=None,
             output_covariance=None, spread=None):
    """
    Builds the quadratic program of the local Wasserstein tracking cost.

    Args:
        pred (PredictionMatrices): The agent's prediction matrices.
        omega (OmegaWeights): Per-step weights s_h.
        mu (np.ndarray): The mean state.
        Q_bar (np.ndarray): Stacked targets (dH-vector).
        R (np.ndarray): (mH) x (mH) symmetric positive-definite regularization.
        u_min, u_max (np.ndarray, optional): Per-step box bounds.
        ball_radius (float, optional): Per-step Euclidean bound.
        output_covariance (np.ndarray, optional): H x d x d output covariances for the trace term
            (a single d x d matrix is used for every step).
        spread (array-like, optional): Per-step barycenter spreads sum_j pi_j ||q_j - q_bar||^2.

    Returns:
        QpProblem
    """
    H, d, m = pred.H, pred.d, pred.m
    mu = np.asarray(mu, dtype=float)
    Q_bar = np.asarray(Q_bar, dtype=float)
    R = np.asarray(R, dtype=float)
    assert omega.H == H, "There must be one Omega weight per horizon step."
    assert Q_bar.shape == (d * H,), "Q_bar must stack one target per horizon step."
    assert R.shape == (m * H, m * H), "R must be (mH) x (mH)."
    assert mu.shape == (pred.Phi.shape[1],), "The mean state must match the prediction matrices."
    assert np.allclose(R, R.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(R).max())), "R must be symmetric."
    try:
        np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        raise ValueError("R must be positive definite.")
    if u_min is not None or u_max is not None:
        assert u_min is not None and u_max is not None, "Box constraints need both bounds."
        assert np.shape(u_min) == np.shape(u_max) == (m,), "Box bounds must match the input dimension."
        assert np.all(np.asarray(u_min) <= np.asarray(u_max)), "Infeasible box: a lower bound exceeds its upper bound."
    if ball_radius is not None:
        assert ball_radius > 0, "The ball radius must be positive."

    weights = omega.scales ** 2
    grams = pred.block_grams()
    Hmat = R.copy()
    f = np.zeros(m * H)
    tracking = 0.0
    for h in range(H):
        if weights[h] == 0:
            continue
        residual = pred.phi_rows(h) @ mu - Q_bar[h * d:(h + 1) * d]
        Hmat += weights[h] * grams[h]
        f += weights[h] * (pred.theta_rows(h).T @ residual)
        tracking += weights[h] * float(residual @ residual)
    Hmat = (Hmat + Hmat.T) / 2

    trace_term = 0.0
    if output_covariance is not None:
        covs = np.broadcast_to(np.asarray(output_covariance, dtype=float), (H, d, d))
        trace_term = float(weights @ np.trace(covs, axis1=1, axis2=2))
    spread_term = 0.0 if spread is None else float(np.sum(spread))

    return QpProblem(Hmat, f, H, m, u_min=u_min, u_max=u_max, ball_radius=ball_radius,
                     tracking_constant=tracking, trace_term=trace_term, spread_term=spread_term)


def solve_unconstrained(qp):
    """
    U = -Hmat^{-1} f by Cholesky factorization.
    """
    try:
        factor = scipy.linalg.cho_factor(qp.Hmat)
    except np.linalg.LinAlgError:
        raise ValueError("The QP Hessian is not positive definite.")
    U = -scipy.linalg.cho_solve(factor, qp.f)
    residual = float(np.linalg.norm(qp.Hmat @ U + qp.f))
    return ControlSolution(U, residual, tuple(), qp.objective(U), method="cholesky")


def solve_box_qp(qp):
    """
    The unique minimizer under the per-step box, with KKT multipliers.
    """
    assert qp.u_min is not None and qp.u_max is not None, "solve_box_qp needs box bounds."
    lo, hi = qp.stacked_bounds()
    # the QP objective is twice 1/2 x^T H x + f^T x, so minimizers and multipliers agree
    res = box_qp(qp.Hmat, qp.f, lo, hi)
    return ControlSolution(res.x, res.kkt_residual, res.active_bounds, qp.objective(res.x),
                           lam_upper=res.lam_upper, lam_lower=res.lam_lower, method=res.method)


def project_ball_per_step(U, radius, m):
    """
    Scales every m-block of U by min(1, radius / ||block||).
    """
    assert radius > 0, "The ball radius must be positive."
    U = np.asarray(U, dtype=float)
    assert U.shape[0] % m == 0, "The input stack length must be a multiple of m."
    blocks = U.reshape(-1, m).copy()
    norms = np.linalg.norm(blocks, axis=1)
    outside = norms > radius
    blocks[outside] *= (radius / norms[outside])[:, None]
    return blocks.ravel()


def solve_ball(qp):
    """The unconstrained solution projected blockwise onto the input ball."""
    sol = solve_unconstrained(qp)
    U = project_ball_per_step(sol.U, qp.ball_radius, qp.m)
    active = tuple(int(i) for i, block in enumerate(U.reshape(-1, qp.m))
                   if np.linalg.norm(block) >= qp.ball_radius * (1 - 1e-12))
    return ControlSolution(U, float(np.linalg.norm(qp.Hmat @ U + qp.f)), active, qp.objective(U), method="ball_projection")


def solve_qp(qp):
    """Dispatches on the constraint mode of ``qp``."""
    if qp.mode == "box":
        return solve_box_qp(qp)
    if qp.mode == "ball":
        return solve_ball(qp)
    return solve_unconstrained(qp)


def mpc_step(model, pred, omega, mu, Q_bar, R, mode="none", u_min=None, u_max=None, ball_radius=None, spread=None):
    """
    Solves the configured QP variant and returns the first input of the optimal sequence.

    Args:
        model (AgentModel): The agent model (for the output noise trace term).
        pred (PredictionMatrices): Prediction matrices.
        omega (OmegaWeights): Per-step weights.
        mu (np.ndarray): Mean state.
        Q_bar (np.ndarray): Stacked targets.
        R (np.ndarray): Input regularization.
        mode (str): ``"none"``, ``"box"`` or ``"ball"``.

    Returns:
        tuple: (u, ControlSolution, QpProblem)
    """
    assert mode in CONSTRAINT_MODES, f"Unknown constraint mode {mode!r}."
    qp = build_qp(pred, omega, mu, Q_bar, R,
                  u_min=u_min if mode == "box" else None,
                  u_max=u_max if mode == "box" else None,
                  ball_radius=ball_radius if mode == "ball" else None,
                  output_covariance=output_noise_covariance(model, pred.r, pred.H),
                  spread=spread)
    sol = solve_qp(qp)
    return sol.first_input(pred.m), sol, qp
