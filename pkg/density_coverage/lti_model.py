"""
    File: lti_model.py
    Date: October 17, 2026

    Discrete-time stochastic LTI agent models: relative degree, the controllability
    and marginal stability checks, prediction matrices, mean propagation, aggregated
    process noise and the one-step noisy simulator.
"""

import logging
import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
REL_DEG_TOL = 1e-10
SYM_TOL = 1e-12
PSD_TOL = 1e-10
STABILITY_TOL = 1e-9


class RelativeDegreeError(ValueError):
    """Raised when C·A^(l-1)·B vanishes for every l <= n."""


def _as_matrix(M, name):
    M = np.atleast_2d(np.array(M, dtype=float))
    assert M.ndim == 2, f"{name} must be a 2-dimensional matrix."
    return M


def _check_covariance(S, name):
    scale = max(1.0, np.abs(S).max()) if S.size > 0 else 1.0
    assert np.allclose(S, S.T, rtol=0.0, atol=SYM_TOL * scale), f"{name} must be symmetric."
    eigvals = np.linalg.eigvalsh((S + S.T) / 2)
    assert eigvals.size == 0 or eigvals.min() >= -PSD_TOL * scale, f"{name} must be positive semidefinite."


def _numerical_rank(M, tol=RANK_TOL):
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


class AgentModel(object):
    """
    The dynamics of a single agent:

        x^{k+1} = A x^k + B u^k + w^k,    y^k = C x^k + v^k

    with w ~ N(0, Sigma_w) and v ~ N(0, Sigma_v).

    Args:
        A (np.ndarray): n x n state transition matrix.
        B (np.ndarray): n x m input matrix.
        C (np.ndarray): d x n output matrix.
        Sigma_w (np.ndarray, optional): n x n process noise covariance. Defaults to zero.
        Sigma_v (np.ndarray, optional): d x d measurement noise covariance. Defaults to zero.
        name (str, optional): A label used in logs and configs.

    Controllability and marginal stability are not enforced here; use :func:`check_assumptions`.
    """

    def __init__(self, A, B, C, Sigma_w=None, Sigma_v=None, name=None):

        A = _as_matrix(A, "A")
        B = _as_matrix(B, "B")
        C = _as_matrix(C, "C")

        assert A.shape[0] == A.shape[1], "A must be square."
        n = A.shape[0]
        assert B.shape[0] == n, "B must have as many rows as A."
        assert C.shape[1] == n, "C must have as many columns as A."

        Sigma_w = np.zeros((n, n)) if Sigma_w is None else _as_matrix(Sigma_w, "Sigma_w")
        Sigma_v = np.zeros((C.shape[0], C.shape[0])) if Sigma_v is None else _as_matrix(Sigma_v, "Sigma_v")
        assert Sigma_w.shape == (n, n), "Sigma_w must be n x n."
        assert Sigma_v.shape == (C.shape[0], C.shape[0]), "Sigma_v must be d x d."
        _check_covariance(Sigma_w, "Sigma_w")
        _check_covariance(Sigma_v, "Sigma_v")

        self.A = A
        self.B = B
        self.C = C
        self.Sigma_w = Sigma_w
        self.Sigma_v = Sigma_v
        self.n = n
        self.m = B.shape[1]
        self.d = C.shape[0]
        self.name = name

        for M in (self.A, self.B, self.C, self.Sigma_w, self.Sigma_v):
            M.setflags(write=False)

        self._powers = [np.eye(n)]
        self._noise_factors = None

    def power(self, k):
        """
        Returns A^k, caching every power computed so far.
        """
        assert k >= 0, "Matrix powers must be nonnegative."
        while len(self._powers) <= k:
            self._powers.append(self.A @ self._powers[-1])
        return self._powers[k]

    @property
    def relative_degree(self):
        return relative_degree(self)

    def noise_factors(self):
        """
        Returns factors (L_w, L_v) with L L^T equal to the noise covariances, built by an
        eigendecomposition with negative eigenvalues clamped at zero.
        """
        if self._noise_factors is None:
            self._noise_factors = (_psd_factor(self.Sigma_w), _psd_factor(self.Sigma_v))
        return self._noise_factors

    def __repr__(self):
        label = f"{self.name}: " if self.name is not None else ""
        return f"AgentModel({label}n={self.n}, m={self.m}, d={self.d})"


class AgentState(object):
    """
    The mutable state of an agent: the true state ``x``, the mean estimate ``mu`` read by
    the controller, and the step counter ``k``.
    """

    def __init__(self, model, x, mu=None, k=0):
        x = np.asarray(x, dtype=float).copy()
        mu = x.copy() if mu is None else np.asarray(mu, dtype=float).copy()
        assert x.shape == (model.n,), "The state must match the model dimension."
        assert mu.shape == (model.n,), "The mean estimate must match the model dimension."
        assert k >= 0, "The step counter must be nonnegative."
        self.model = model
        self.x = x
        self.mu = mu
        self.k = k

    def output(self):
        """The noise-free output C x."""
        return self.model.C @ self.x


class PredictionMatrices(object):
    """
    Stacked prediction over the outputs at k+r, ..., k+r+H-1:

        Y = Theta U + Phi mu

    Args:
        Theta (np.ndarray): (dH) x (mH) block-lower-triangular Toeplitz matrix.
        Phi (np.ndarray): (dH) x n matrix.
        r (int): output relative degree.
        H (int): horizon.
        d (int): output dimension.
        m (int): input dimension.
    """

    def __init__(self, Theta, Phi, r, H, d, m):
        self.Theta = Theta
        self.Phi = Phi
        self.r = r
        self.H = H
        self.d = d
        self.m = m
        self.Theta.setflags(write=False)
        self.Phi.setflags(write=False)
        self._block_grams = None

    def theta_rows(self, h):
        """The h-th row block of Theta (output at step k+r+h)."""
        return self.Theta[h * self.d:(h + 1) * self.d, :]

    def phi_rows(self, h):
        return self.Phi[h * self.d:(h + 1) * self.d, :]

    def block_grams(self):
        """
        Cached Theta_h^T Theta_h for each output block h, so that the QP Hessian can be
        rebuilt as sum_h s_h^2 Theta_h^T Theta_h + R when only the weights change.
        """
        if self._block_grams is None:
            self._block_grams = [self.theta_rows(h).T @ self.theta_rows(h) for h in range(self.H)]
        return self._block_grams

    def predict(self, U, mu):
        """Noise-free stacked outputs for input stack ``U`` and mean state ``mu``."""
        return self.Theta @ np.asarray(U, dtype=float) + self.Phi @ np.asarray(mu, dtype=float)


def relative_degree(model):
    """
    The output relative degree of the model: the smallest r >= 1 with C A^(r-1) B != 0.

    Entries count as nonzero when they exceed 1e-10 times max(1, ||C|| ||A^(r-1)|| ||B||).

    Args:
        model (AgentModel): The agent model.

    Returns:
        int or None: The relative degree, or None when C A^(l-1) B = 0 for all l <= n.
    """
    A, B, C = model.A, model.B, model.C
    assert A.shape[0] == A.shape[1] == B.shape[0] == C.shape[1], "Dimension mismatch between A, B and C."

    norm_B = np.linalg.norm(B, 2)
    norm_C = np.linalg.norm(C, 2)
    for ell in range(1, model.n + 1):
        P = model.power(ell - 1)
        M = C @ P @ B
        scale = norm_C * np.linalg.norm(P, 2) * norm_B
        if np.abs(M).max() > REL_DEG_TOL * max(1.0, scale):
            return ell
    return None


def check_assumptions(model):
    """
    Reports whether the model is controllable and at least marginally stable. Degenerate
    models produce a failing report rather than an exception.

    Args:
        model (AgentModel): The agent model.

    Returns:
        dict: ``{"controllable": bool, "marginally_stable": bool, "details": list of str}``.
    """
    details = list()
    A, B = model.A, model.B
    n = model.n

    ctrb = np.hstack([model.power(k) @ B for k in range(n)]) if B.size > 0 else np.zeros((n, 0))
    rank = _numerical_rank(ctrb)
    controllable = rank == n
    if not controllable:
        details.append(f"controllability matrix has rank {rank} < {n}")

    marginally_stable = True
    eigvals = np.linalg.eigvals(A)
    moduli = np.abs(eigvals)
    for lam in eigvals[moduli > 1 + STABILITY_TOL]:
        marginally_stable = False
        details.append(f"eigenvalue {lam:.6g} lies outside the unit disk (|lambda| = {abs(lam):.6g})")

    unit = sorted(eigvals[np.abs(moduli - 1) <= 1e-6], key=lambda z: (z.real, z.imag))
    clusters = list()
    for lam in unit:
        if clusters and abs(lam - clusters[-1][-1]) <= 1e-6:
            clusters[-1].append(lam)
        else:
            clusters.append([lam])
    scale = max(1.0, np.linalg.norm(A, 2))
    for cluster in clusters:
        lam = np.mean(cluster)
        algebraic = len(cluster)
        geometric = n - _numerical_rank(A - lam * np.eye(n), tol=1e-6 / scale)
        if geometric < algebraic:
            marginally_stable = False
            details.append(f"unit-modulus eigenvalue {lam:.6g} is defective "
                           f"(geometric multiplicity {geometric} < algebraic multiplicity {algebraic})")

    return {"controllable": controllable, "marginally_stable": marginally_stable, "details": details}


def build_prediction_matrices(model, H):
    """
    Builds Theta and Phi so that Theta U + Phi mu stacks the noise-free outputs at steps
    k+r, ..., k+r+H-1 for inputs U = (u^k, ..., u^{k+H-1}).

    Args:
        model (AgentModel): The agent model.
        H (int): The prediction horizon.

    Returns:
        PredictionMatrices
    """
    assert H >= 1, "The horizon must be a positive integer."
    r = relative_degree(model)
    if r is None:
        raise RelativeDegreeError(f"The relative degree of {model!r} is undefined.")

    d, m, n = model.d, model.m, model.n
    Theta = np.zeros((d * H, m * H))
    Phi = np.zeros((d * H, n))
    for p in range(H):
        Phi[p * d:(p + 1) * d, :] = model.C @ model.power(r + p)
        for s in range(p + 1):
            Theta[p * d:(p + 1) * d, s * m:(s + 1) * m] = model.C @ model.power(r - 1 + p - s) @ model.B

    return PredictionMatrices(Theta, Phi, r, H, d, m)


def propagate_mean(model, mu, inputs):
    """
    Returns A^h mu + sum_tau A^(h-1-tau) B u_tau for the h inputs given.
    """
    mu = np.asarray(mu, dtype=float)
    assert mu.shape == (model.n,), "The mean state must match the model dimension."
    out = mu.copy()
    for u in inputs:
        u = np.asarray(u, dtype=float)
        assert u.shape == (model.m,), "Each input must match the model input dimension."
        out = model.A @ out + model.B @ u
    return out


def noise_covariance_h(model, h):
    """
    The covariance of the accumulated process noise after h steps,

        Sigma_h = sum_{l=0}^{h-1} A^(h-1-l) Sigma_w (A^(h-1-l))^T.
    """
    assert h >= 1, "h must be a positive integer."
    Sigma = np.zeros((model.n, model.n))
    for ell in range(h):
        P = model.power(h - 1 - ell)
        Sigma += P @ model.Sigma_w @ P.T
    return (Sigma + Sigma.T) / 2


def _psd_factor(S):
    eigvals, eigvecs = np.linalg.eigh((S + S.T) / 2)
    scale = max(1.0, np.abs(S).max()) if S.size > 0 else 1.0
    assert eigvals.size == 0 or eigvals.min() >= -PSD_TOL * scale, "Covariance must be positive semidefinite."
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def sample_gaussian(factor, rng):
    """A zero-mean Gaussian draw with covariance factor @ factor.T."""
    return factor @ rng.standard_normal(factor.shape[1])


def simulate_step(model, x, u, rng, u_min=None, u_max=None):
    """
    One step of the stochastic dynamics: x_next = A x + B u + w and y = C x_next + v.

    Both noise terms are always drawn, so that runs with the same seed stay aligned
    whatever the covariances are.

    Args:
        model (AgentModel): The agent model.
        x (np.ndarray): The current true state.
        u (np.ndarray): The applied input.
        rng (np.random.Generator): The agent's random source.
        u_min, u_max (np.ndarray, optional): When given, the input must lie in the box.

    Returns:
        tuple: (x_next, y)
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    assert x.shape == (model.n,), "The state must match the model dimension."
    assert u.shape == (model.m,), "The input must match the model input dimension."
    if u_min is not None:
        assert np.all(u >= np.asarray(u_min) - 1e-9), "The input violates its lower bound."
    if u_max is not None:
        assert np.all(u <= np.asarray(u_max) + 1e-9), "The input violates its upper bound."

    L_w, L_v = model.noise_factors()
    x_next = model.A @ x + model.B @ u + sample_gaussian(L_w, rng)
    y = model.C @ x_next + sample_gaussian(L_v, rng)
    return x_next, y


class SteadyStateKalman(object):
    """
    A steady-state Kalman filter for the agent model. The prior covariance solves the
    discrete algebraic Riccati equation for (A, C, Sigma_w, Sigma_v).

    Args:
        model (AgentModel): The agent model.
        regularization (float): Added to singular noise covariances before solving.
    """

    def __init__(self, model, regularization=1e-9):
        Q = model.Sigma_w
        R = model.Sigma_v
        if np.linalg.matrix_rank(R) < model.d:
            logger.warning("Measurement covariance is singular; regularizing by %g for the Riccati solve.", regularization)
            R = R + regularization * np.eye(model.d)
        if np.linalg.matrix_rank(Q) < model.n:
            Q = Q + regularization * np.eye(model.n)
        P = scipy.linalg.solve_discrete_are(model.A.T, model.C.T, Q, R)
        S = model.C @ P @ model.C.T + R
        self.model = model
        self.P = P
        self.gain = scipy.linalg.solve(S, model.C @ P, assume_a="pos").T

    def update(self, mu, u, y):
        """Predict with the applied input, then correct with the measurement ``y``."""
        prior = self.model.A @ mu + self.model.B @ u
        return prior + self.gain @ (y - self.model.C @ prior)
