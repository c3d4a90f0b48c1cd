"""
    File: baseline.py
    Date: October 17, 2026

    A greedy tracking baseline: each agent steers toward the nearest sample that still has
    positive weight, measured from its noisy output, and saturates the unconstrained
    tracking input at the box bounds. Weight updates and consensus are shared with the
    density-driven controller so only the target choice and the input constraint handling differ.
"""

import numpy as np
from density_coverage.mpc import (
    ControlSolution,
    OmegaWeights,
    build_qp,
    default_R,
    output_noise_covariance,
    project_ball_per_step,
    solve_unconstrained,
)


def nearest_positive_sample(point, samples, weights):
    """
    Index of the positive-weight sample nearest to ``point`` (ties by lowest index), or
    None when every weight is zero.
    """
    positive = np.flatnonzero(weights > 0)
    if positive.size == 0:
        return None
    d2 = np.sum((samples[positive] - np.asarray(point, dtype=float)) ** 2, axis=1)
    return int(positive[np.lexsort((positive, d2))[0]])


def greedy_baseline_input(agent, view, settings):
    """
    The baseline input of one agent.

    Args:
        agent (Agent): The agent (its last measured output picks the target).
        view (FieldView): The agent's field view.
        settings (CoverageSettings): Shared parameters.

    Returns:
        tuple: (u, ControlSolution, QpProblem). The solution describes the saturated input
        sequence, so its objective is the one of the applied input.
    """
    pred = agent.pred
    H = settings.horizon
    target = nearest_positive_sample(agent.last_output, view.samples, view.weights)
    if target is None and settings.on_exhaustion == "reset":
        view.reset()
        target = nearest_positive_sample(agent.last_output, view.samples, view.weights)

    if target is None:
        omega = OmegaWeights.zeros(H)
        Q = np.zeros(pred.d * H)
    else:
        omega = OmegaWeights(np.full(H, np.sqrt(settings.alpha)))
        Q = np.tile(view.samples[target], H)

    qp = build_qp(pred, omega, agent.state.mu, Q, default_R(pred.m, H, settings.r_scale),
                  output_covariance=output_noise_covariance(agent.model, pred.r, H))
    sol = saturate(solve_unconstrained(qp), qp, settings)
    return sol.first_input(pred.m), sol, qp


def saturate(sol, qp, settings):
    """
    Clips every step of an unconstrained solution to the input box (or scales it into the
    input ball) and re-evaluates the objective at the clipped sequence.
    """
    m = qp.m
    if settings.constraint == "box":
        lo, hi = np.tile(settings.u_min, qp.H), np.tile(settings.u_max, qp.H)
        U = np.clip(sol.U, lo, hi)
        active = tuple(int(i) for i in np.flatnonzero((U <= lo) | (U >= hi)))
    elif settings.constraint == "ball":
        U = project_ball_per_step(sol.U, settings.ball_radius, m)
        active = tuple(int(i) for i, block in enumerate(U.reshape(-1, m))
                       if np.linalg.norm(block) >= settings.ball_radius * (1 - 1e-12))
    else:
        return sol
    return ControlSolution(U, float(np.linalg.norm(qp.Hmat @ U + qp.f)), active, qp.objective(U), method="saturated")
