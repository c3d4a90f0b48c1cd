"""
    File: coordinator.py
    Date: October 17, 2026

    The decentralized coverage cycle. Each step every agent

      1. selects local target samples around its nominal prediction, moves their
         barycenter into its reachable output set and solves its tracking QP (no communication),
      2. applies the input and lowers the weights of the samples its new output covered,
      3. exchanges weights with the agents in communication range (min-weight consensus).
"""

import logging
from dataclasses import dataclass
import networkx as nx
import numpy as np
from density_coverage.lti_model import AgentState, SteadyStateKalman, build_prediction_matrices, sample_gaussian, simulate_step
from density_coverage.mpc import OmegaWeights, default_R, mpc_step
from density_coverage.reachability import confidence_ellipsoid, mean_reachable_set, project_to_reachable_output
from density_coverage.transport import local_transport_plan, transport_cost, weighted_barycenter, barycenter_spread

logger = logging.getLogger(__name__)

SELECTION_MODES = ("hard", "soft")
WEIGHT_RULES = ("transport", "radius")
EXHAUSTION_POLICIES = ("idle", "reset")
POLICIES = ("density", "greedy_baseline")


@dataclass
class CoverageSettings:
    """
    Parameters shared by every agent of a scenario.

    ``alpha`` is the mass each agent transports per step (1 / mission length).
    """
    alpha: float
    horizon: int = 1
    constraint: str = "box"
    u_min: np.ndarray = None
    u_max: np.ndarray = None
    ball_radius: float = None
    r_scale: float = 0.01
    selection: str = "hard"
    soft_lambda: float = 1.0
    k_nn: int = 25
    comm_range: float = 5.0
    weight_update: str = "transport"
    radius_sigma: float = 0.5
    on_exhaustion: str = "idle"
    policy: str = "density"
    confidence: float = 0.95

    def __post_init__(self):
        assert self.alpha > 0, "The per-step agent mass must be positive."
        assert self.horizon >= 1, "The horizon must be a positive integer."
        assert self.constraint in ("none", "box", "ball"), f"Unknown constraint mode {self.constraint!r}."
        assert self.selection in SELECTION_MODES, f"Unknown selection mode {self.selection!r}."
        assert self.weight_update in WEIGHT_RULES, f"Unknown weight update rule {self.weight_update!r}."
        assert self.on_exhaustion in EXHAUSTION_POLICIES, f"Unknown exhaustion policy {self.on_exhaustion!r}."
        assert self.policy in POLICIES, f"Unknown policy {self.policy!r}."
        assert self.soft_lambda > 0, "The soft-constraint weight must be positive."
        assert self.k_nn >= 1, "The candidate pool must hold at least one sample."
        assert self.comm_range > 0, "The communication range must be positive."
        if self.constraint == "box":
            assert self.u_min is not None and self.u_max is not None, "Box constraints need u_min and u_max."
            self.u_min = np.asarray(self.u_min, dtype=float)
            self.u_max = np.asarray(self.u_max, dtype=float)
        if self.constraint == "ball":
            assert self.ball_radius is not None and self.ball_radius > 0, "Ball constraints need a positive radius."


class SampleField(object):
    """
    The target samples q_j with each agent's local capacity weights beta_{i,j}.

    Args:
        samples (np.ndarray): N x d sample points.
        num_agents (int): Number of agents holding a local view.
    """

    def __init__(self, samples, num_agents):
        samples = np.array(samples, dtype=float)
        if samples.ndim == 1:
            samples = samples.reshape(-1, 1)
        assert samples.shape[0] > 0, "The field must contain at least one sample."
        assert num_agents >= 1, "There must be at least one agent."
        self.samples = samples
        self.samples.setflags(write=False)
        self.weights = np.full((num_agents, samples.shape[0]), 1.0 / samples.shape[0])

    @property
    def num_samples(self):
        return self.samples.shape[0]

    @property
    def num_agents(self):
        return self.weights.shape[0]

    def view(self, i):
        return FieldView(self, i)

    def remaining(self, i):
        return float(self.weights[i].sum())


class FieldView(object):
    """
    Agent i's window on the field: the shared samples (read only) and its own weights.
    """

    def __init__(self, field, index):
        self._field = field
        self.index = index

    @property
    def samples(self):
        return self._field.samples

    @property
    def weights(self):
        return self._field.weights[self.index]

    @property
    def remaining(self):
        return float(self.weights.sum())

    def subtract(self, targets, masses):
        w = self._field.weights[self.index]
        w[targets] = np.maximum(w[targets] - masses, 0.0)

    def scale(self, factors):
        self._field.weights[self.index] *= factors

    def reset(self):
        """Mission reset: restores the uniform weights 1/N."""
        self._field.weights[self.index] = 1.0 / self._field.num_samples


class HorizonTarget(object):
    """
    The selection for one prediction step h: the plan's sample indices and masses, the
    barycenter q_bar, the tracked target q_tilde and the distance between them.
    """

    def __init__(self, h, plan, q_bar, q_tilde, distance, spread):
        self.h = h
        self.plan = plan
        self.q_bar = q_bar
        self.q_tilde = q_tilde
        self.distance = distance
        self.spread = spread

    @property
    def indices(self):
        return self.plan.targets

    @property
    def masses(self):
        return self.plan.masses

    @property
    def mass(self):
        return self.plan.total_mass


class TargetSelection(object):
    """
    Per-step targets for h = r, ..., r+H-1. An idle selection carries no targets.
    """

    def __init__(self, targets, d, H):
        self.targets = targets
        self.d = d
        self.H = H

    @classmethod
    def idle(cls, d, H):
        return cls(list(), d, H)

    @property
    def is_idle(self):
        return len(self.targets) == 0

    def stacked_targets(self):
        if self.is_idle:
            return np.zeros(self.d * self.H)
        return np.concatenate([t.q_tilde for t in self.targets])

    def omega(self):
        if self.is_idle:
            return OmegaWeights.zeros(self.H)
        return OmegaWeights.from_masses([t.mass for t in self.targets])

    def spreads(self):
        return [t.spread for t in self.targets]

    def mean_distance(self):
        return float(np.mean([t.distance for t in self.targets])) if self.targets else 0.0


class Agent(object):
    """
    An agent: its model, prediction matrices, state, estimator and random source.

    Args:
        index (int): Position of the agent in the swarm (its field view).
        model (AgentModel): The dynamics.
        x0 (np.ndarray): True initial state.
        mu0 (np.ndarray): Initial mean estimate.
        rng (np.random.Generator): The agent's own random source.
        horizon (int): Prediction horizon.
        estimator (str): ``"oracle"`` (mu = x) or ``"kalman"`` (steady-state Kalman filter).
    """

    def __init__(self, index, model, x0, mu0, rng, horizon, estimator="oracle"):
        assert estimator in ("oracle", "kalman"), f"Unknown estimator {estimator!r}."
        self.index = index
        self.model = model
        self.pred = build_prediction_matrices(model, horizon)
        self.rng = rng
        self.estimator = estimator
        self.state = AgentState(model, x0, mu=x0 if estimator == "oracle" else mu0)
        self._kalman = SteadyStateKalman(model) if estimator == "kalman" else None
        _, L_v = model.noise_factors()
        self.last_output = model.C @ self.state.x + sample_gaussian(L_v, rng)
        self._ellipsoid = None

    def position(self):
        """The noise-free output C x, used for communication range."""
        return self.state.output()

    def ellipsoid(self, alpha):
        if self._ellipsoid is None:
            self._ellipsoid = confidence_ellipsoid(self.model, 1, alpha)
        return self._ellipsoid

    def advance(self, u, x_next, y):
        if self._kalman is not None:
            self.state.mu = self._kalman.update(self.state.mu, u, y)
        else:
            self.state.mu = x_next.copy()
        self.state.x = x_next
        self.state.k += 1
        self.last_output = y


class CommGraph(object):
    """
    The communication graph: an edge joins agents whose positions are within ``comm_range``.
    """

    def __init__(self, graph, comm_range):
        self.graph = graph
        self.comm_range = comm_range

    @property
    def adjacency(self):
        return nx.to_numpy_array(self.graph, nodelist=sorted(self.graph.nodes), dtype=bool)

    @property
    def edges(self):
        return sorted(tuple(sorted(e)) for e in self.graph.edges)

    @property
    def num_edges(self):
        return self.graph.number_of_edges()

    def neighbors(self, i):
        return sorted(self.graph.neighbors(i))

    def is_connected(self):
        return nx.is_connected(self.graph)

    def new_edges(self, previous):
        """Edges present now but not in ``previous`` (all edges when there is none)."""
        if previous is None:
            return self.edges
        old = set(previous.edges)
        return [e for e in self.edges if e not in old]


class CycleEvent(object):
    """
    What happened during one cycle: the step reached, outputs and inputs, communication
    edges, projection distances and per-agent QP objectives with their constant terms.
    """

    def __init__(self, step, outputs, inputs, edges, new_edges, projection_distances, objectives,
                 constants, idle, removed_mass, in_ellipsoid):
        self.step = step
        self.outputs = outputs
        self.inputs = inputs
        self.edges = edges
        self.new_edges = new_edges
        self.projection_distances = projection_distances
        self.objectives = objectives
        self.constants = constants
        self.idle = idle
        self.removed_mass = removed_mass
        self.in_ellipsoid = in_ellipsoid

    @property
    def num_edges(self):
        return len(self.edges)


def candidate_pool(source, samples, capacities, k_nn, mass):
    """
    The k_nn positive-weight samples nearest to ``source``, or every positive-weight
    sample when those k_nn cannot absorb ``mass``.
    """
    positive = np.flatnonzero(capacities > 0)
    if positive.size <= k_nn:
        return positive
    d2 = np.sum((samples[positive] - source) ** 2, axis=1)
    pool = positive[np.lexsort((positive, d2))[:k_nn]]
    if capacities[pool].sum() < mass - 1e-12:
        return positive
    return pool


def reachable_output_set(agent, h, settings):
    """
    The mean output set reachable in h steps, or None when inputs are unconstrained.
    A ball bound is replaced by its enclosing box.
    """
    if settings.constraint == "box":
        u_min, u_max = settings.u_min, settings.u_max
    elif settings.constraint == "ball":
        u_max = np.full(agent.model.m, settings.ball_radius)
        u_min = -u_max
    else:
        return None
    return mean_reachable_set(agent.model, agent.state.mu, h, u_min, u_max).image(agent.model.C)


def _greedy_selection(center, samples, capacities, mass, k_nn):
    pool = candidate_pool(center, samples, capacities, k_nn, mass)
    plan = local_transport_plan(center, samples, capacities, mass, candidates=pool)
    return plan, weighted_barycenter(plan, samples)


def _project(q_bar, out_set):
    if out_set is None:
        return q_bar.copy(), 0.0
    return project_to_reachable_output(q_bar, out_set)


def soft_constraint_select(nominal, samples, capacities, mass, out_set, lam, k_nn=25, h=None,
                           max_iter=20, rtol=1e-6):
    """
    Sample selection with reachability as a soft constraint. Minimizes

        J = sum_j pi_j ||nominal - q_j||^2 + lam ||q_bar - q_hat||^2

    over capacity-feasible plans pi (barycenter q_bar) and reachable outputs q_hat by
    alternating: (a) with q_hat fixed, reselect samples greedily around the point
    (nominal + kappa q_hat) / (1 + kappa), kappa = lam / mass, which minimizes an upper bound
    of J and is accepted only if J decreases; (b) with the samples fixed, q_hat is the
    projection of q_bar onto the reachable set (a box QP over the inputs).

    Falls back to the hard projection of the greedy barycenter if the iteration cap is hit.

    Returns:
        HorizonTarget
    """
    assert lam > 0, "The soft-constraint weight must be positive."
    nominal = np.asarray(nominal, dtype=float)

    def objective(plan, q_bar, q_hat):
        return transport_cost(plan, samples, nominal) + lam * float(np.sum((q_bar - q_hat) ** 2))

    plan0, q_bar0 = _greedy_selection(nominal, samples, capacities, mass, k_nn)
    q_hat0, dist0 = _project(q_bar0, out_set)
    if dist0 == 0.0:
        return HorizonTarget(h, plan0, q_bar0, q_hat0, 0.0, barycenter_spread(plan0, samples))

    plan, q_bar, q_hat = plan0, q_bar0, q_hat0
    J = objective(plan, q_bar, q_hat)
    kappa = lam / mass
    converged = False
    for _ in range(max_iter):
        center = (nominal + kappa * q_hat) / (1 + kappa)
        new_plan, new_q_bar = _greedy_selection(center, samples, capacities, mass, k_nn)
        new_q_hat, _ = _project(new_q_bar, out_set)
        new_J = objective(new_plan, new_q_bar, new_q_hat)
        if new_J > J:
            converged = True
            break
        change = (J - new_J) / max(abs(J), 1e-300)
        plan, q_bar, q_hat, J = new_plan, new_q_bar, new_q_hat, new_J
        if change < rtol:
            converged = True
            break

    if not converged:
        logger.debug("Soft selection did not settle in %d iterations; using the hard projection.", max_iter)
        plan, q_bar, q_hat = plan0, q_bar0, q_hat0

    return HorizonTarget(h, plan, q_bar, q_hat, float(np.linalg.norm(q_hat - q_bar)), barycenter_spread(plan, samples))


def select_targets(agent, view, settings):
    """
    Stage 1 target selection for one agent, reading only its own state and field view.

    For each h = r, ..., r+H-1 the nominal output C A^h mu anchors a greedy transport of the
    agent's mass alpha onto positive-weight samples. The barycenter is then moved into the
    reachable output set by projection (hard mode) or by the soft-constraint selection.
    Capacity used at one step is not offered again at the later steps of the same horizon.

    Returns:
        TargetSelection (idle when the field is exhausted under the idle policy).
    """
    model, pred = agent.model, agent.pred
    H, alpha = settings.horizon, settings.alpha

    if view.remaining < H * alpha - 1e-12:
        if settings.on_exhaustion == "reset":
            logger.debug("Agent %d exhausted its field view; resetting weights.", agent.index)
            view.reset()
        else:
            logger.debug("Agent %d exhausted its field view; idling.", agent.index)
            return TargetSelection.idle(model.d, H)

    samples = view.samples
    capacities = view.weights.copy()
    targets = list()
    for step in range(H):
        h = pred.r + step
        nominal = model.C @ (model.power(h) @ agent.state.mu)
        out_set = reachable_output_set(agent, h, settings)

        if settings.selection == "soft":
            target = soft_constraint_select(nominal, samples, capacities, alpha, out_set, settings.soft_lambda,
                                            k_nn=settings.k_nn, h=h)
        else:
            plan, q_bar = _greedy_selection(nominal, samples, capacities, alpha, settings.k_nn)
            q_tilde, distance = _project(q_bar, out_set)
            target = HorizonTarget(h, plan, q_bar, q_tilde, distance, barycenter_spread(plan, samples))

        capacities[target.indices] = np.maximum(capacities[target.indices] - target.masses, 0.0)
        targets.append(target)

    return TargetSelection(targets, model.d, H)


def control_input(agent, selection, settings):
    """
    Solves the agent's tracking QP for a selection; returns (u, ControlSolution, QpProblem).
    """
    pred = agent.pred
    R = default_R(pred.m, pred.H, settings.r_scale)
    return mpc_step(agent.model, pred, selection.omega(), agent.state.mu, selection.stacked_targets(), R,
                    mode=settings.constraint, u_min=settings.u_min, u_max=settings.u_max,
                    ball_radius=settings.ball_radius, spread=selection.spreads())


def update_weights(view, y, mass=None, plan=None, rule="transport", sigma=None):
    """
    Stage 2: lowers the agent's weights of the samples covered by its new output ``y``.

    With the transport rule the plan moving ``mass`` from ``y`` onto the positive-weight
    samples (greedy, partial when the view runs dry) is subtracted, beta_j <- max(0, beta_j - pi_j).
    With the radius rule every weight is scaled by 1 - exp(-||y - q_j||^2 / sigma^2).

    Returns:
        float: The total weight removed.
    """
    before = view.remaining
    if rule == "radius":
        assert sigma is not None and sigma > 0, "The radius rule needs a positive sigma."
        d2 = np.sum((view.samples - np.asarray(y, dtype=float)) ** 2, axis=1)
        view.scale(1.0 - np.exp(-d2 / sigma ** 2))
    else:
        if plan is None:
            assert mass is not None, "The transport rule needs a plan or a mass."
            plan = local_transport_plan(y, view.samples, view.weights, mass, allow_partial=True)
        view.subtract(plan.targets, plan.masses)
    return before - view.remaining


def consensus_exchange(weights, graph):
    """
    One synchronous round of min-weight consensus: each agent keeps the elementwise
    minimum of its own weights and those of its neighbors.
    """
    weights = np.asarray(weights, dtype=float)
    synced = weights.copy()
    for i in range(weights.shape[0]):
        neighbors = graph.neighbors(i) if i in graph.graph else []
        if neighbors:
            synced[i] = np.minimum(weights[i], weights[neighbors].min(axis=0))
    return synced


def comm_graph(positions, comm_range):
    """
    The communication graph of agents at ``positions``: agents i and j are connected when
    ||pos_i - pos_j|| <= comm_range.
    """
    assert comm_range > 0, "The communication range must be positive."
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    G = nx.Graph()
    G.add_nodes_from(range(positions.shape[0]))
    for i in range(positions.shape[0]):
        for j in range(i + 1, positions.shape[0]):
            if np.linalg.norm(positions[i] - positions[j]) <= comm_range:
                G.add_edge(i, j)
    return CommGraph(G, comm_range)


def run_cycle(agents, field, settings, previous_graph=None):
    """
    Executes one cycle for the whole swarm, in a fixed agent order.

    Returns:
        tuple: (CycleEvent, CommGraph)
    """
    # imported here: the baseline module builds on this one
    from density_coverage.baseline import greedy_baseline_input

    inputs, selections, solutions, problems = list(), list(), list(), list()
    for agent in agents:
        view = field.view(agent.index)
        if settings.policy == "greedy_baseline":
            u, sol, qp = greedy_baseline_input(agent, view, settings)
            selection = None
        else:
            selection = select_targets(agent, view, settings)
            u, sol, qp = control_input(agent, selection, settings)
        inputs.append(u)
        selections.append(selection)
        solutions.append(sol)
        problems.append(qp)

    outputs, in_ellipsoid = list(), list()
    for agent, u in zip(agents, inputs):
        mean_next = agent.model.A @ agent.state.mu + agent.model.B @ u
        x_next, y = simulate_step(agent.model, agent.state.x, u, agent.rng)
        in_ellipsoid.append(agent.ellipsoid(settings.confidence).contains(x_next, mean_next))
        agent.advance(u, x_next, y)
        outputs.append(y)

    removed = list()
    for agent, y in zip(agents, outputs):
        view = field.view(agent.index)
        removed.append(update_weights(view, y, mass=settings.alpha, rule=settings.weight_update, sigma=settings.radius_sigma))

    graph = comm_graph([agent.position() for agent in agents], settings.comm_range)
    field.weights = consensus_exchange(field.weights, graph)

    event = CycleEvent(
        step=agents[0].state.k,
        outputs=np.array(outputs),
        inputs=np.array(inputs),
        edges=graph.edges,
        new_edges=graph.new_edges(previous_graph),
        projection_distances=[0.0 if s is None else s.mean_distance() for s in selections],
        objectives=[sol.objective for sol in solutions],
        constants=[qp.constant for qp in problems],
        idle=[s is not None and s.is_idle for s in selections],
        removed_mass=removed,
        in_ellipsoid=in_ellipsoid,
    )
    return event, graph
