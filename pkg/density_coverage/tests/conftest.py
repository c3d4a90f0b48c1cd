import numpy as np
import pytest
from density_coverage.generate_models import double_integrator
from density_coverage.lti_model import AgentModel
from density_coverage.scenario import ScenarioConfig


@pytest.fixture
def line_model():
    return double_integrator(num_dims=1, dt=0.2, drag=0.5)


@pytest.fixture
def planar_model():
    return double_integrator(num_dims=2, dt=0.2, drag=0.5)


@pytest.fixture
def noisy_planar_model():
    return double_integrator(num_dims=2, dt=0.2, drag=0.5,
                             Sigma_w=0.001 * np.eye(4), Sigma_v=0.05 * np.eye(2))


@pytest.fixture
def integrator_1d():
    # x+ = x + u, y = x: relative degree 1
    return AgentModel([[1.0]], [[1.0]], [[1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def small_config_dict(policy="density", mission_length=20, runs=2, noise=True):
    model = {
        "name": "planar",
        "kind": "double_integrator",
        "params": {"num_dims": 2, "dt": 0.2, "drag": 0.5},
        "expected_relative_degree": 2,
    }
    if noise:
        model["Sigma_w"] = {"shape": [4, 4], "scale": 0.001}
        model["Sigma_v"] = {"shape": [2, 2], "scale": 0.05}
    return {
        "name": "small_ring",
        "models": [model],
        "agents": [
            {"model": "planar", "x0": [0.0, 0.0, 0.0, 0.0]},
            {"model": "planar", "x0": [0.5, 0.0, 0.0, 0.0], "init_cov": {"shape": [4, 4], "diag": [0.01, 0.01, 0.0, 0.0]}},
        ],
        "field": {"kind": "ring", "params": {"num_samples": 40, "radius": 2.0}, "seed": 0},
        "control": {"horizon": 1, "constraint": "box", "u_min": [-1.0, -1.0], "u_max": [1.0, 1.0], "r_scale": 1e-8},
        "coverage": {"policy": policy, "on_exhaustion": "reset"},
        "run": {"mission_length": mission_length, "runs": runs, "base_seed": 3, "w2_stride": 5},
    }


@pytest.fixture
def small_config():
    return ScenarioConfig.model_validate(small_config_dict())


@pytest.fixture
def make_config():
    def make(**kwargs):
        return ScenarioConfig.model_validate(small_config_dict(**kwargs))
    return make


@pytest.fixture
def config_dict():
    return small_config_dict
