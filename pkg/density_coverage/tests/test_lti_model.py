import numpy as np
import pytest
from density_coverage.generate_models import double_integrator, quadrotor_hover
from density_coverage.lti_model import (
    AgentModel,
    RelativeDegreeError,
    SteadyStateKalman,
    build_prediction_matrices,
    check_assumptions,
    noise_covariance_h,
    propagate_mean,
    relative_degree,
    simulate_step,
)


def test_model_dimensions(planar_model):
    assert (planar_model.n, planar_model.m, planar_model.d) == (4, 2, 2)
    np.testing.assert_array_equal(planar_model.Sigma_w, np.zeros((4, 4)))


def test_model_rejects_non_square_A():
    with pytest.raises(AssertionError, match="A must be square."):
        AgentModel(np.ones((2, 3)), np.ones((2, 1)), np.ones((1, 3)))


def test_model_rejects_asymmetric_noise():
    with pytest.raises(AssertionError, match="Sigma_w must be symmetric."):
        AgentModel(np.eye(2), np.ones((2, 1)), np.ones((1, 2)), Sigma_w=[[1.0, 0.5], [0.0, 1.0]])


def test_model_matrices_are_read_only(planar_model):
    with pytest.raises(ValueError):
        planar_model.A[0, 0] = 2.0


def test_relative_degree_integrator(integrator_1d):
    assert relative_degree(integrator_1d) == 1


def test_relative_degree_double_integrator(line_model, planar_model):
    assert relative_degree(line_model) == 2
    assert planar_model.relative_degree == 2


def test_relative_degree_quadrotor():
    assert relative_degree(quadrotor_hover()) == 4


def test_relative_degree_undefined():
    # the input never reaches the output
    model = AgentModel(np.diag([1.0, 0.5]), [[0.0], [1.0]], [[1.0, 0.0]])
    assert relative_degree(model) is None
    with pytest.raises(RelativeDegreeError):
        build_prediction_matrices(model, 1)


def test_check_assumptions_damped_double_integrator(planar_model):
    report = check_assumptions(planar_model)
    assert report["controllable"]
    assert report["marginally_stable"]
    assert report["details"] == []


def test_check_assumptions_quadrotor():
    report = check_assumptions(quadrotor_hover())
    assert report["controllable"], report["details"]
    assert report["marginally_stable"], report["details"]


def test_check_assumptions_undamped_is_defective():
    report = check_assumptions(double_integrator(num_dims=1, drag=0.0))
    assert report["controllable"]
    assert not report["marginally_stable"]
    assert any("defective" in d for d in report["details"])


def test_check_assumptions_unstable_and_uncontrollable():
    unstable = AgentModel([[1.1]], [[1.0]], [[1.0]])
    assert not check_assumptions(unstable)["marginally_stable"]

    uncontrollable = AgentModel(np.diag([1.0, 0.5]), [[1.0], [0.0]], [[1.0, 1.0]])
    report = check_assumptions(uncontrollable)
    assert not report["controllable"]
    assert report["marginally_stable"]


def test_prediction_matrices_shapes(planar_model):
    pred = build_prediction_matrices(planar_model, 3)
    assert pred.Theta.shape == (6, 6)
    assert pred.Phi.shape == (6, 4)
    assert pred.r == 2
    # block lower triangular
    np.testing.assert_array_equal(pred.Theta[0:2, 2:6], np.zeros((2, 4)))


def test_prediction_matches_propagation(planar_model, rng):
    H = 3
    pred = build_prediction_matrices(planar_model, H)
    mu = rng.standard_normal(4)
    U = rng.standard_normal(2 * H)
    Y = pred.predict(U, mu)
    inputs = [U[2 * s:2 * s + 2] for s in range(H)] + [np.zeros(2)] * pred.r
    for p in range(H):
        x = propagate_mean(planar_model, mu, inputs[:pred.r + p])
        np.testing.assert_allclose(Y[2 * p:2 * p + 2], planar_model.C @ x, atol=1e-12)


def test_prediction_horizon_must_be_positive(planar_model):
    with pytest.raises(AssertionError, match="The horizon must be a positive integer."):
        build_prediction_matrices(planar_model, 0)


def test_block_grams(planar_model):
    pred = build_prediction_matrices(planar_model, 2)
    for h, G in enumerate(pred.block_grams()):
        np.testing.assert_allclose(G, pred.theta_rows(h).T @ pred.theta_rows(h))


def test_propagate_mean_no_inputs(planar_model):
    mu = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(propagate_mean(planar_model, mu, []), mu)


def test_noise_covariance_recursion(noisy_planar_model):
    model = noisy_planar_model
    np.testing.assert_allclose(noise_covariance_h(model, 1), model.Sigma_w)
    for h in range(1, 5):
        expected = model.A @ noise_covariance_h(model, h) @ model.A.T + model.Sigma_w
        np.testing.assert_allclose(noise_covariance_h(model, h + 1), expected, atol=1e-14)


def test_simulate_step_without_noise(planar_model, rng):
    x = np.array([1.0, -1.0, 0.5, 0.0])
    u = np.array([0.3, -0.2])
    x_next, y = simulate_step(planar_model, x, u, rng)
    np.testing.assert_allclose(x_next, planar_model.A @ x + planar_model.B @ u)
    np.testing.assert_allclose(y, planar_model.C @ x_next)


def test_simulate_step_is_reproducible(noisy_planar_model):
    x = np.zeros(4)
    u = np.ones(2)
    a = simulate_step(noisy_planar_model, x, u, np.random.default_rng(5))
    b = simulate_step(noisy_planar_model, x, u, np.random.default_rng(5))
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_simulate_step_checks_bounds(planar_model, rng):
    with pytest.raises(AssertionError, match="The input violates its upper bound."):
        simulate_step(planar_model, np.zeros(4), np.array([2.0, 0.0]), rng, u_min=-np.ones(2), u_max=np.ones(2))


def test_steady_state_kalman(noisy_planar_model):
    kf = SteadyStateKalman(noisy_planar_model)
    assert kf.gain.shape == (4, 2)
    np.testing.assert_allclose(kf.P, kf.P.T, atol=1e-10)
    assert np.linalg.eigvalsh(kf.P).min() > 0

    mu = np.array([1.0, 0.0, 0.0, 0.5])
    u = np.array([0.1, 0.1])
    prior = noisy_planar_model.A @ mu + noisy_planar_model.B @ u
    np.testing.assert_allclose(kf.update(mu, u, noisy_planar_model.C @ prior), prior)


def test_relative_degree_ignores_output_scale(planar_model, integrator_1d):
    for model in (planar_model, integrator_1d, quadrotor_hover()):
        r = relative_degree(model)
        for scale in (-2.5, 1e-3, 40.0):
            scaled = AgentModel(model.A, model.B, scale * model.C)
            assert relative_degree(scaled) == r


def test_noise_covariance_grows_polynomially(noisy_planar_model):
    quadrotor = quadrotor_hover(Sigma_w=0.2 * np.eye(12))
    for model in (noisy_planar_model, quadrotor):
        base = np.trace(noise_covariance_h(model, 1))
        for h in range(1, 201):
            assert np.trace(noise_covariance_h(model, h)) <= base * (1.0 + h) ** (2 * model.n)


def test_process_noise_sample_mean(noisy_planar_model):
    rng = np.random.default_rng(14)
    N = 100_000
    total = np.zeros(4)
    for _ in range(N):
        x_next, _ = simulate_step(noisy_planar_model, np.zeros(4), np.zeros(2), rng)
        total += x_next
    bound = 4 * np.sqrt(np.trace(noisy_planar_model.Sigma_w) / N)
    assert np.linalg.norm(total / N) <= bound


def test_quadrotor_modes():
    model = quadrotor_hover()
    eigvals = np.sort(np.abs(np.linalg.eigvals(model.A)))
    np.testing.assert_allclose(eigvals[-3:], 1.0, atol=1e-6)
    assert eigvals[:-3].max() < 0.21
    gains = np.abs(model.C @ model.power(3) @ model.B)
    # each position is driven by exactly one input
    assert np.count_nonzero(gains > 1e-12) == 3
    np.testing.assert_allclose(gains.max(axis=1), [6.54e-3, 6.54e-3, 6.4e-3], rtol=1e-9)
