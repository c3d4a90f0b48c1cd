import numpy as np
import pytest
from density_coverage.generate_fields import gaussian_mixture_samples, ring_samples, torus_samples, uniform_grid


def test_uniform_grid():
    grid = uniform_grid([0.0, -1.0], [1.0, 1.0], 3)
    assert grid.shape == (9, 2)
    np.testing.assert_allclose(grid[0], [0.0, -1.0])
    np.testing.assert_allclose(grid[-1], [1.0, 1.0])
    np.testing.assert_allclose(grid[1], [0.0, 0.0])


def test_uniform_grid_bad_corners():
    with pytest.raises(AssertionError, match="The lower corner must not exceed the upper corner."):
        uniform_grid([1.0], [0.0], 4)


def test_ring_samples():
    pts = ring_samples(8, radius=2.0, center=(1.0, -1.0))
    np.testing.assert_allclose(np.linalg.norm(pts - [1.0, -1.0], axis=1), 2.0)
    np.testing.assert_allclose(pts[0], [3.0, -1.0])


def test_ring_jitter_is_seeded():
    a = ring_samples(50, width=0.1, seed=4)
    b = ring_samples(50, width=0.1, seed=4)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(np.linalg.norm(a, axis=1), 4.0)


def test_torus_samples_lie_on_surface():
    pts = torus_samples(300, major_radius=6.0, minor_radius=2.0, seed=7)
    assert pts.shape == (300, 3)
    rho = np.linalg.norm(pts[:, :2], axis=1)
    np.testing.assert_allclose((rho - 6.0) ** 2 + pts[:, 2] ** 2, 4.0, rtol=1e-10)
    np.testing.assert_array_equal(pts, torus_samples(300, seed=7))


def test_torus_outer_side_is_denser():
    pts = torus_samples(4000, seed=1)
    rho = np.linalg.norm(pts[:, :2], axis=1)
    assert np.mean(rho > 6.0) > 0.55


def test_gaussian_mixture_counts():
    pts = gaussian_mixture_samples(10, [[0.0, 0.0], [100.0, 0.0]], [np.eye(2), np.eye(2)], weights=[0.75, 0.25], seed=2)
    assert pts.shape == (10, 2)
    # 7.5 and 2.5 are rounded by largest remainder (stable order): 8 and 2
    assert np.sum(pts[:, 0] > 50) == 2
