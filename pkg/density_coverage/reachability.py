"""
    File: reachability.py
    Date: October 17, 2026

    Mean reachable sets of an agent under box input constraints (zonotopes), confidence
    ellipsoids of the accumulated process noise, and projection onto the reachable output set.
"""

import logging
import numpy as np
import scipy.optimize
import scipy.special
from density_coverage.lti_model import noise_covariance_h
from density_coverage.qp_solvers import projected_gradient

logger = logging.getLogger(__name__)

PROJECTION_KKT_TOL = 1e-8


class MeanReachableSet(object):
    """
    The zonotope {center + offset + G lam : lam in [-1, 1]^g}.

    Args:
        center (np.ndarray): The zero-input propagation A^h mu.
        generators (np.ndarray): dim x g matrix whose columns are the generators.
        offset (np.ndarray): Contribution of the input-range midpoints.
        h (int): Number of steps the set describes.

    ``S.image(C)`` maps the set through a matrix and gives the image zonotope.
    """

    def __init__(self, center, generators, offset, h):
        self.center = np.asarray(center, dtype=float)
        self.generators = np.asarray(generators, dtype=float).reshape(self.center.shape[0], -1)
        self.offset = np.asarray(offset, dtype=float)
        self.h = h
        assert self.offset.shape == self.center.shape, "The offset must have the dimension of the center."

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def num_generators(self):
        return self.generators.shape[1]

    @property
    def midpoint(self):
        return self.center + self.offset

    def point(self, lam):
        """The set point with generator coefficients ``lam``."""
        return self.midpoint + self.generators @ np.asarray(lam, dtype=float)

    def image(self, M):
        """The image zonotope {M z : z in set}."""
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return MeanReachableSet(M @ self.center, M @ self.generators, M @ self.offset, self.h)

    def support(self, direction):
        """The support function max_{z in set} <direction, z>."""
        direction = np.asarray(direction, dtype=float)
        return float(direction @ self.midpoint + np.abs(direction @ self.generators).sum())

    def interval_hull(self):
        """The tightest axis-aligned box (lower, upper) containing the set."""
        radius = np.abs(self.generators).sum(axis=1)
        return self.midpoint - radius, self.midpoint + radius

    def __repr__(self):
        return f"MeanReachableSet(dim={self.dim}, generators={self.num_generators}, h={self.h})"


class ConfidenceEllipsoid(object):
    """
    The set {x : (x - mean)^T Sigma_h^+ (x - mean) <= level} of the h-step process noise,
    restricted to the range of Sigma_h when the covariance is singular.

    Args:
        Sigma_h (np.ndarray): Aggregated process noise covariance.
        level (float): The chi-squared quantile.
        alpha (float): Confidence level in (0, 1).
    """

    def __init__(self, Sigma_h, level, alpha):
        assert level > 0, "The chi-squared level must be positive."
        assert 0 < alpha < 1, "The confidence level must lie in (0, 1)."
        eigvals, eigvecs = np.linalg.eigh(Sigma_h)
        assert eigvals.size == 0 or eigvals.min() >= -1e-10 * max(1.0, np.abs(Sigma_h).max()), "Sigma_h must be positive semidefinite."
        keep = eigvals > 1e-12 * max(1.0, eigvals.max(initial=0.0))
        self.Sigma_h = Sigma_h
        self.level = level
        self.alpha = alpha
        self.basis = eigvecs[:, keep]
        self.variances = eigvals[keep]
        self.degenerate = not keep.all()

    @property
    def semi_axes(self):
        """Semi-axis lengths along ``basis``."""
        return np.sqrt(self.level * self.variances)

    def contains(self, x, mean, tol=1e-9):
        """Whether ``x`` lies in the ellipsoid centered at ``mean``."""
        e = np.asarray(x, dtype=float) - np.asarray(mean, dtype=float)
        coords = self.basis.T @ e
        if np.linalg.norm(e - self.basis @ coords) > tol * max(1.0, np.linalg.norm(e)):
            return False
        return bool(np.sum(coords ** 2 / self.variances) <= self.level + tol)

    def __repr__(self):
        return f"ConfidenceEllipsoid(alpha={self.alpha}, level={self.level:.4g}, degenerate={self.degenerate})"


def mean_reachable_set(model, mu, h, u_min, u_max):
    """
    The set of mean states reachable in ``h`` steps from ``mu`` with every input in the box
    [u_min, u_max], returned in zonotope form with m h generators.
    """
    mu = np.asarray(mu, dtype=float)
    u_min = np.asarray(u_min, dtype=float)
    u_max = np.asarray(u_max, dtype=float)
    assert h >= 1, "h must be a positive integer."
    assert mu.shape == (model.n,), "The mean state must match the model dimension."
    assert u_min.shape == u_max.shape == (model.m,), "Input bounds must match the model input dimension."
    assert np.all(u_min <= u_max), "Lower input bounds must not exceed upper input bounds."

    mid = (u_min + u_max) / 2
    half = (u_max - u_min) / 2
    offset = np.zeros(model.n)
    generators = list()
    for tau in range(h):
        M = model.power(h - 1 - tau) @ model.B
        offset += M @ mid
        generators.append(M * half)

    return MeanReachableSet(model.power(h) @ mu, np.hstack(generators), offset, h)


def chi2_quantile(dof, alpha):
    """
    The alpha-quantile of the chi-squared distribution with ``dof`` degrees of freedom, by
    bisection on the regularized lower incomplete gamma function.
    """
    assert dof >= 1, "The degrees of freedom must be positive."
    assert 0 < alpha < 1, "The confidence level must lie in (0, 1)."

    def cdf_gap(x):
        return scipy.special.gammainc(dof / 2, x / 2) - alpha

    upper = max(1.0, float(dof))
    while cdf_gap(upper) < 0:
        upper *= 2
    return scipy.optimize.bisect(cdf_gap, 0.0, upper, xtol=1e-9, rtol=1e-12)


def confidence_ellipsoid(model, h, alpha=0.95):
    """
    The confidence ellipsoid of the h-step prediction error at level ``alpha``.
    """
    return ConfidenceEllipsoid(noise_covariance_h(model, h), chi2_quantile(model.n, alpha), alpha)


def _closest_coefficients(reach_set, point):
    """
    Solves min ||midpoint + G lam - point|| over lam in [-1, 1]^g as a bounded least-squares
    problem, starting from lam = 0.
    """
    G = reach_set.generators
    b = np.asarray(point, dtype=float) - reach_set.midpoint
    g = G.shape[1]
    if g == 0 or not np.any(G):
        return np.zeros(g)

    res = scipy.optimize.lsq_linear(G, b, bounds=(-1.0, 1.0), method="bvls", max_iter=10 * g, tol=1e-12)
    lam = np.clip(res.x, -1.0, 1.0)

    grad = G.T @ (G @ lam - b)
    kkt = np.where(lam >= 1.0, np.maximum(grad, 0.0), np.where(lam <= -1.0, np.minimum(grad, 0.0), grad))
    if res.status == 0 or np.abs(kkt).max() > PROJECTION_KKT_TOL * max(1.0, np.linalg.norm(b)):
        logger.debug("Bounded least squares stopped early (status %d); refining projection.", res.status)
        lam, _ = projected_gradient(G.T @ G, -G.T @ b, -np.ones(g), np.ones(g), x0=lam, max_iter=200_000)
    return lam


def project_to_reachable_output(q_bar, reach_set, C=None, return_coefficients=False):
    """
    Projects ``q_bar`` onto the reachable output set C M.

    Args:
        q_bar (np.ndarray): The point to project (d-vector).
        reach_set (MeanReachableSet): The mean reachable state set (or an output set when ``C`` is None).
        C (np.ndarray, optional): Output matrix mapping the state set to the output space.
        return_coefficients (bool, default=False): If True, also return the generator coefficients.

    Returns:
        tuple: (q_tilde, distance), or (q_tilde, distance, lam). When ``q_bar`` is inside the
        set, ``q_tilde`` is ``q_bar`` itself and the distance is 0.
    """
    q_bar = np.asarray(q_bar, dtype=float)
    out_set = reach_set if C is None else reach_set.image(C)
    assert q_bar.shape == (out_set.dim,), "The point must live in the output space of the set."

    lam = _closest_coefficients(out_set, q_bar)
    q_tilde = out_set.point(lam)
    distance = float(np.linalg.norm(q_tilde - q_bar))

    scale = np.linalg.norm(q_bar - out_set.midpoint) + np.linalg.norm(out_set.generators, axis=0).sum()
    if distance <= 1e-9 * max(1.0, scale):
        q_tilde, distance = q_bar.copy(), 0.0

    if return_coefficients:
        return q_tilde, distance, lam
    return q_tilde, distance


def membership(reach_set, point, tol=1e-8):
    """
    Whether ``point`` lies within ``tol`` of the zonotope.
    """
    point = np.asarray(point, dtype=float)
    assert point.shape == (reach_set.dim,), "The point must have the dimension of the set."
    if np.linalg.norm(point - reach_set.midpoint) > np.linalg.norm(reach_set.generators, axis=0).sum() + tol:
        return False
    lam = _closest_coefficients(reach_set, point)
    return bool(np.linalg.norm(reach_set.point(lam) - point) <= tol)
