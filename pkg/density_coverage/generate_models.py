"""
    File: generate_models.py
    Date: October 17, 2026

    Constructors for the agent models bundled with the scenarios.
"""

import numpy as np
from density_coverage.lti_model import AgentModel


def double_integrator(num_dims=2, dt=0.2, drag=0.5, Sigma_w=None, Sigma_v=None, name="double_integrator"):
    """
    A point mass per output axis, forward-Euler discretized, with linear drag on the velocity.

    The state is ordered ``[p_1, ..., p_d, v_1, ..., v_d]``, the input is the acceleration and
    the output is the position. With ``drag = 0`` the unit eigenvalue of each axis is defective.

    Args:
        num_dims (int): Number of output axes d.
        dt (float): Sampling period.
        drag (float): Velocity drag coefficient; the velocity decays by (1 - drag*dt) per step.
        Sigma_w (np.ndarray, optional): Process noise covariance (2d x 2d).
        Sigma_v (np.ndarray, optional): Measurement noise covariance (d x d).
        name (str): Model label.

    Returns:
        AgentModel
    """
    assert num_dims >= 1, "The number of dimensions must be positive."
    assert dt > 0, "The sampling period must be positive."
    assert 0 <= drag * dt < 1, "drag * dt must lie in [0, 1)."

    I = np.eye(num_dims)
    Z = np.zeros((num_dims, num_dims))
    A = np.block([[I, dt * I], [Z, (1 - drag * dt) * I]])
    B = np.vstack([Z, dt * I])
    C = np.hstack([I, Z])
    return AgentModel(A, B, C, Sigma_w=Sigma_w, Sigma_v=Sigma_v, name=name)


QUADROTOR_STATES = ["x", "vx", "y", "vy", "z", "vz", "roll", "roll_rate", "pitch", "pitch_rate", "thrust", "thrust_rate"]
QUADROTOR_INPUTS = ["roll_torque", "pitch_torque", "thrust_command"]


def quadrotor_hover(dt=0.1,
                    gravity=9.81,
                    mass=1.0,
                    inertia=0.15,
                    drag=8.0,
                    attitude_stiffness=64.0,
                    attitude_damping=16.0,
                    rotor_frequency=8.0,
                    rotor_damping=1.0,
                    Sigma_w=None,
                    Sigma_v=None,
                    name="quadrotor_hover"):
    """
    A 12-state linearization of a quadrotor about hover, with position output.

    States follow :data:`QUADROTOR_STATES`. Roll and pitch torques act on the attitude rates,
    the attitudes tilt the thrust vector into lateral acceleration, and the collective thrust
    command reaches the vertical acceleration through a second-order rotor lag. Every input
    therefore reaches the position after four steps and the output relative degree is 4.
    Yaw does not couple into position at hover and is left out.

    The attitude loop carries a stiffness and damping (an inner stabilizing loop) and the
    velocities carry drag, so the only unit eigenvalues are the three positions and they are
    simple. With the defaults every other mode sits at 0.2 and the three input-to-position
    gains C A^3 B nearly agree (g dt^4 / inertia and rotor_frequency^2 dt^4 / mass).
    A one-step tracking controller u = beta G^-1 (q - C A^4 x) then leaves each axis with the
    characteristic polynomial (1 - beta) (z - 1) (z - 0.2)^3 + beta z^4, which is stable
    for every beta in (0, 1].

    Returns:
        AgentModel
    """
    assert dt > 0, "The sampling period must be positive."
    assert mass > 0 and inertia > 0, "Mass and inertia must be positive."
    assert 0 <= drag * dt < 1, "drag * dt must lie in [0, 1)."

    A = np.eye(12)
    B = np.zeros((12, 3))
    ix = {s: i for i, s in enumerate(QUADROTOR_STATES)}

    for pos, vel in (("x", "vx"), ("y", "vy"), ("z", "vz")):
        A[ix[pos], ix[vel]] = dt
        A[ix[vel], ix[vel]] = 1 - drag * dt

    # small-angle tilt: pitch pushes +x, roll pushes -y
    A[ix["vx"], ix["pitch"]] = dt * gravity
    A[ix["vy"], ix["roll"]] = -dt * gravity
    A[ix["vz"], ix["thrust"]] = dt / mass

    for angle, rate in (("roll", "roll_rate"), ("pitch", "pitch_rate")):
        A[ix[angle], ix[rate]] = dt
        A[ix[rate], ix[angle]] = -dt * attitude_stiffness
        A[ix[rate], ix[rate]] = 1 - dt * attitude_damping

    A[ix["thrust"], ix["thrust_rate"]] = dt
    A[ix["thrust_rate"], ix["thrust"]] = -dt * rotor_frequency ** 2
    A[ix["thrust_rate"], ix["thrust_rate"]] = 1 - dt * 2 * rotor_damping * rotor_frequency

    B[ix["roll_rate"], 0] = dt / inertia
    B[ix["pitch_rate"], 1] = dt / inertia
    B[ix["thrust_rate"], 2] = dt * rotor_frequency ** 2

    C = np.zeros((3, 12))
    C[0, ix["x"]] = C[1, ix["y"]] = C[2, ix["z"]] = 1.0

    return AgentModel(A, B, C, Sigma_w=Sigma_w, Sigma_v=Sigma_v, name=name)


MODEL_GENERATORS = {
    "double_integrator": double_integrator,
    "quadrotor_hover": quadrotor_hover,
}
