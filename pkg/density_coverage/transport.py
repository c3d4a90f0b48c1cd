"""
    File: transport.py
    Date: October 17, 2026

    Discrete optimal transport: the exact 2-Wasserstein distance between weighted point
    clouds, greedy single-source transport plans, weighted barycenters and the
    time-averaged empirical distribution of the swarm outputs.
"""

import logging
import numpy as np
import ot
from numba import jit
from ortools.linear_solver import pywraplp

logger = logging.getLogger(__name__)

MASS_TOL = 1e-9


class FieldExhaustedError(ValueError):
    """Raised when the remaining sample capacity cannot absorb the requested mass."""


def _as_points(points):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    return points


class DiscreteMeasure(object):
    """
    A probability measure supported on finitely many points.

    Args:
        points (array-like): N x d support points (a flat list is read as N points in 1D).
        masses (array-like, optional): N nonnegative masses summing to 1. Uniform by default.
    """

    def __init__(self, points, masses=None):
        points = _as_points(points)
        assert points.shape[0] > 0, "A measure must have at least one support point."
        masses = np.full(points.shape[0], 1.0 / points.shape[0]) if masses is None else np.asarray(masses, dtype=float)
        assert masses.shape == (points.shape[0],), "There must be one mass per support point."
        assert np.all(masses >= 0), "Masses must be nonnegative."
        assert abs(masses.sum() - 1.0) <= MASS_TOL, "Masses must sum to 1."
        self.points = points
        self.masses = masses
        self.points.setflags(write=False)
        self.masses.setflags(write=False)

    @property
    def num_points(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def shifted(self, offset):
        """The same measure translated by ``offset``."""
        return DiscreteMeasure(self.points + np.asarray(offset, dtype=float), self.masses.copy())

    def __repr__(self):
        return f"DiscreteMeasure(num_points={self.num_points}, dim={self.dim})"


class TransportPlan(object):
    """
    A nonnegative mass assignment from source points to target points.

    Args:
        sources (array-like): Source index of each entry.
        targets (array-like): Target index of each entry.
        masses (array-like): Mass carried by each entry.
    """

    def __init__(self, sources, targets, masses):
        self.sources = np.asarray(sources, dtype=np.int64)
        self.targets = np.asarray(targets, dtype=np.int64)
        self.masses = np.asarray(masses, dtype=float)
        assert self.sources.shape == self.targets.shape == self.masses.shape, "Plan entries must have matching lengths."
        assert np.all(self.masses >= 0), "Plan masses must be nonnegative."

    @classmethod
    def from_matrix(cls, G, tol=0.0):
        """Builds a plan from a dense coupling matrix, keeping entries above ``tol``."""
        rows, cols = np.nonzero(G > tol)
        return cls(rows, cols, G[rows, cols])

    @property
    def entries(self):
        return [(int(i), int(j), float(p)) for i, j, p in zip(self.sources, self.targets, self.masses)]

    @property
    def total_mass(self):
        return float(self.masses.sum())

    def row_sums(self, num_sources):
        return np.bincount(self.sources, weights=self.masses, minlength=num_sources)

    def col_sums(self, num_targets):
        return np.bincount(self.targets, weights=self.masses, minlength=num_targets)

    def as_matrix(self, num_sources, num_targets):
        G = np.zeros((num_sources, num_targets))
        np.add.at(G, (self.sources, self.targets), self.masses)
        return G

    def __len__(self):
        return len(self.masses)

    def __repr__(self):
        return f"TransportPlan(entries={len(self)}, total_mass={self.total_mass:.6g})"


def _transport_lp(a, b, M):
    """Solves the transportation LP with GLOP; returns the optimal coupling."""
    solver = pywraplp.Solver.CreateSolver("GLOP")
    n, N = M.shape
    pi = [[solver.NumVar(0.0, solver.infinity(), f"pi_{i}_{j}") for j in range(N)] for i in range(n)]
    for i in range(n):
        solver.Add(sum(pi[i]) == a[i])
    for j in range(N):
        solver.Add(sum(pi[i][j] for i in range(n)) == b[j])
    solver.Minimize(sum(M[i, j] * pi[i][j] for i in range(n) for j in range(N)))
    status = solver.Solve()
    assert status == pywraplp.Solver.OPTIMAL, "The transportation LP did not reach an optimal solution."
    return np.array([[pi[i][j].solution_value() for j in range(N)] for i in range(n)])


def wasserstein2(rho, nu, return_plan=False, solver="network_simplex"):
    """
    The 2-Wasserstein distance between two discrete measures, from the exact optimum of the
    transportation problem with squared Euclidean cost.

    Args:
        rho (DiscreteMeasure): The first measure.
        nu (DiscreteMeasure): The second measure.
        return_plan (bool, default=False): If True, also return the optimal TransportPlan.
        solver (str, default="network_simplex"): ``"network_simplex"`` (POT's exact EMD solver) or
            ``"lp"`` (ortools GLOP on the dense transportation LP; small instances only).

    Returns:
        float, or (float, TransportPlan) when ``return_plan`` is True.
    """
    assert rho.num_points > 0 and nu.num_points > 0, "Measures must be nonempty."
    assert rho.dim == nu.dim, "Measures must live in the same dimension."

    a = rho.masses / rho.masses.sum()
    b = nu.masses / nu.masses.sum()
    M = ot.dist(rho.points, nu.points)

    if solver == "network_simplex":
        G = ot.emd(a, b, M, numItermax=10_000_000)
    elif solver == "lp":
        G = _transport_lp(a, b, M)
    else:
        raise ValueError(f"Unknown transport solver {solver!r}.")

    cost = float(np.sum(G * M))
    w2 = float(np.sqrt(max(cost, 0.0)))
    if return_plan:
        return w2, TransportPlan.from_matrix(G)
    return w2


@jit(nopython=True)
def _greedy_fill(sorted_caps, mass):
    """compiled greedy fill: take capacity in the given order until ``mass`` is placed"""
    taken = np.zeros(sorted_caps.shape[0])
    remaining = mass
    for idx in range(sorted_caps.shape[0]):
        if remaining <= 0.0:
            break
        amount = min(sorted_caps[idx], remaining)
        taken[idx] = amount
        remaining -= amount
    return taken


def local_transport_plan(source, samples, capacities, mass, candidates=None, allow_partial=False):
    """
    Transports ``mass`` from a single source point to the samples, filling the nearest
    samples up to their capacities first. For one source this greedy fill is an optimal
    solution of the transportation LP. Equal distances are broken by ascending sample index.

    Args:
        source (np.ndarray): The source point (d-vector).
        samples (np.ndarray): N x d sample points.
        capacities (np.ndarray): N remaining capacities (the agent's weights).
        mass (float): The mass to transport.
        candidates (np.ndarray, optional): Restricts the fill to these sample indices.
        allow_partial (bool, default=False): If True, transport only the available capacity
            when it falls short of ``mass`` instead of raising.

    Returns:
        TransportPlan: A single-source plan (source index 0) with strictly positive entries.
    """
    source = np.asarray(source, dtype=float)
    samples = _as_points(samples)
    capacities = np.asarray(capacities, dtype=float)
    assert samples.shape[0] > 0, "The sample field must be nonempty."
    assert capacities.shape == (samples.shape[0],), "There must be one capacity per sample."
    assert source.shape == (samples.shape[1],), "The source must have the sample dimension."
    assert mass >= 0, "The transported mass must be nonnegative."

    idx = np.arange(samples.shape[0]) if candidates is None else np.asarray(candidates, dtype=np.int64)
    idx = idx[capacities[idx] > 0]
    d2 = np.sum((samples[idx] - source) ** 2, axis=1)
    order = np.lexsort((idx, d2))
    idx = idx[order]
    caps = capacities[idx]

    available = float(caps.sum())
    if available < mass - 1e-12:
        if not allow_partial:
            raise FieldExhaustedError(f"Remaining capacity {available:.3g} cannot absorb mass {mass:.3g}.")
        mass = available

    taken = _greedy_fill(caps, float(mass))
    keep = taken > 0
    return TransportPlan(np.zeros(int(keep.sum()), dtype=np.int64), idx[keep], taken[keep])


def weighted_barycenter(plan, points):
    """
    The transport-mass weighted average of the plan's target points.
    """
    points = _as_points(points)
    total = plan.total_mass
    assert total > 0, "The transport plan must carry positive mass."
    return (plan.masses @ points[plan.targets]) / total


def barycenter_spread(plan, points):
    """
    The spread sum_j pi_j ||q_j - q_bar||^2 of the plan's targets about their barycenter.
    """
    points = _as_points(points)
    q_bar = weighted_barycenter(plan, points)
    return float(plan.masses @ np.sum((points[plan.targets] - q_bar) ** 2, axis=1))


def transport_cost(plan, points, source):
    """The cost sum_j pi_j ||source - q_j||^2 of a single-source plan."""
    points = _as_points(points)
    return float(plan.masses @ np.sum((points[plan.targets] - np.asarray(source, dtype=float)) ** 2, axis=1))


class EmpiricalDistribution(object):
    """
    The time-averaged empirical distribution of the swarm outputs: a uniform measure over
    every output produced so far, (k+1) n_a points after k steps.

    Args:
        outputs (array-like): The n_a initial outputs (one per agent).
    """

    def __init__(self, outputs, _blocks=None):
        if _blocks is None:
            outputs = _as_points(outputs)
            assert outputs.shape[0] > 0, "There must be at least one agent."
            _blocks = (outputs.copy(),)
        self._blocks = _blocks
        self.num_agents = _blocks[0].shape[0]
        self.k = len(_blocks) - 1

    @property
    def points(self):
        return np.vstack(self._blocks)

    @property
    def num_points(self):
        return (self.k + 1) * self.num_agents

    def as_measure(self):
        return DiscreteMeasure(self.points)

    def __repr__(self):
        return f"EmpiricalDistribution(k={self.k}, num_agents={self.num_agents})"


def update_empirical(dist, outputs):
    """
    Appends one output per agent. As a measure the result is

        (k+1)/(k+2) * dist + 1/(k+2) * uniform(outputs).
    """
    outputs = _as_points(outputs)
    assert outputs.shape == dist._blocks[0].shape, "There must be exactly one output per agent."
    return EmpiricalDistribution(None, _blocks=dist._blocks + (outputs.copy(),))


def subsample_measure(measure, size, rng):
    """
    A uniform measure on ``size`` support points of ``measure`` drawn without replacement.
    Returns ``measure`` itself when it is already small enough.
    """
    if measure.num_points <= size:
        return measure
    idx = np.sort(rng.choice(measure.num_points, size=size, replace=False))
    return DiscreteMeasure(measure.points[idx])
