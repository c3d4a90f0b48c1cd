"""
    File: generate_fields.py
    Date: October 17, 2026

    Deterministic samplers producing target sample points q_j.
"""

import numpy as np


def uniform_grid(lower, upper, num_per_dim):
    """
    Points of a regular grid over the box [lower, upper].

    Args:
        lower (array-like): Lower corner.
        upper (array-like): Upper corner.
        num_per_dim (int): Number of grid points along each axis.

    Returns:
        np.ndarray: (num_per_dim ** d) x d array, ordered lexicographically.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    assert lower.shape == upper.shape, "Lower and upper corners must have the same dimension."
    assert np.all(lower <= upper), "The lower corner must not exceed the upper corner."
    assert num_per_dim >= 1, "There must be at least one point per dimension."

    axes = [np.linspace(lo, hi, num_per_dim) for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def ring_samples(num_samples, radius=4.0, center=(0.0, 0.0), width=0.0, seed=None):
    """
    Points on a planar ring, evenly spaced in angle, with optional radial jitter of
    standard deviation ``width``.
    """
    assert num_samples >= 1, "There must be at least one sample."
    assert radius > 0, "The radius must be positive."
    rng = np.random.default_rng(seed)
    angles = 2 * np.pi * np.arange(num_samples) / num_samples
    radii = radius + width * rng.standard_normal(num_samples)
    return np.asarray(center, dtype=float) + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])


def torus_samples(num_samples, major_radius=6.0, minor_radius=2.0, center=(0.0, 0.0, 0.0), seed=None):
    """
    Points uniformly distributed (by area) on the surface of a torus around the z-axis.

    Angles are drawn by rejection so that the outer side of the torus, which has more
    area, receives proportionally more samples.
    """
    assert num_samples >= 1, "There must be at least one sample."
    assert major_radius > minor_radius > 0, "The major radius must exceed the minor radius."
    rng = np.random.default_rng(seed)

    tube = list()
    while len(tube) < num_samples:
        v = rng.uniform(0.0, 2 * np.pi, size=num_samples)
        accept = rng.uniform(0.0, 1.0, size=num_samples) <= (major_radius + minor_radius * np.cos(v)) / (major_radius + minor_radius)
        tube.extend(v[accept].tolist())
    v = np.array(tube[:num_samples])
    u = rng.uniform(0.0, 2 * np.pi, size=num_samples)

    ring = major_radius + minor_radius * np.cos(v)
    points = np.column_stack([ring * np.cos(u), ring * np.sin(u), minor_radius * np.sin(v)])
    return np.asarray(center, dtype=float) + points


def gaussian_mixture_samples(num_samples, means, covs, weights=None, seed=None):
    """
    Samples of a Gaussian mixture. Component counts are allotted deterministically from
    the weights (largest remainders), then each component is sampled.
    """
    means = np.atleast_2d(np.asarray(means, dtype=float))
    covs = np.asarray(covs, dtype=float)
    num_comps = means.shape[0]
    weights = np.full(num_comps, 1.0 / num_comps) if weights is None else np.asarray(weights, dtype=float)
    assert covs.shape == (num_comps, means.shape[1], means.shape[1]), "There must be one d x d covariance per component."
    assert np.all(weights >= 0) and weights.sum() > 0, "Mixture weights must be nonnegative and not all zero."
    weights = weights / weights.sum()

    rng = np.random.default_rng(seed)
    counts = np.floor(weights * num_samples).astype(int)
    remainders = weights * num_samples - counts
    for idx in np.argsort(-remainders, kind="stable")[:num_samples - counts.sum()]:
        counts[idx] += 1

    return np.vstack([rng.multivariate_normal(mu, cov, size=c) for mu, cov, c in zip(means, covs, counts) if c > 0])


FIELD_GENERATORS = {
    "grid": uniform_grid,
    "ring": ring_samples,
    "torus": torus_samples,
    "gaussian_mixture": gaussian_mixture_samples,
}
