"""
    File: scenario.py
    Date: October 17, 2026

    The scenario schema (pydantic models mirroring the TOML sections) and the construction
    of agents, target field and coverage settings from a validated scenario.
"""

from importlib import resources
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from density_coverage.coordinator import Agent, CoverageSettings, SampleField
from density_coverage.generate_fields import FIELD_GENERATORS
from density_coverage.generate_models import MODEL_GENERATORS
from density_coverage.lti_model import AgentModel, relative_degree

SEEDED_FIELDS = ("ring", "torus", "gaussian_mixture")


class MatrixSpec(BaseModel):
    """
    A matrix given by its shape and exactly one of: row-major ``data``, a ``diag``onal,
    or a ``scale`` s meaning s I.
    """
    model_config = ConfigDict(extra="forbid")

    shape: tuple[int, int]
    data: Optional[list[float]] = None
    diag: Optional[list[float]] = None
    scale: Optional[float] = None

    @model_validator(mode="after")
    def check_entries(self):
        rows, cols = self.shape
        given = [v is not None for v in (self.data, self.diag, self.scale)]
        if rows < 1 or cols < 1:
            raise ValueError("shape entries must be positive")
        if sum(given) != 1:
            raise ValueError("exactly one of data, diag or scale must be given")
        if self.data is not None and len(self.data) != rows * cols:
            raise ValueError(f"data has {len(self.data)} entries, shape needs {rows * cols}")
        if (self.diag is not None or self.scale is not None) and rows != cols:
            raise ValueError("diag and scale need a square shape")
        if self.diag is not None and len(self.diag) != rows:
            raise ValueError(f"diag has {len(self.diag)} entries, shape needs {rows}")
        return self

    def to_array(self):
        rows, cols = self.shape
        if self.data is not None:
            return np.array(self.data, dtype=float).reshape(rows, cols)
        if self.diag is not None:
            return np.diag(np.array(self.diag, dtype=float))
        return self.scale * np.eye(rows)

    @classmethod
    def from_array(cls, M):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return cls(shape=M.shape, data=M.ravel().tolist())


class ModelSpec(BaseModel):
    """An agent model: explicit matrices or a named generator with parameters."""
    model_config = ConfigDict(extra="forbid")

    name: str
    kind: Literal["explicit", "double_integrator", "quadrotor_hover"] = "explicit"
    A: Optional[MatrixSpec] = None
    B: Optional[MatrixSpec] = None
    C: Optional[MatrixSpec] = None
    Sigma_w: Optional[MatrixSpec] = None
    Sigma_v: Optional[MatrixSpec] = None
    params: dict[str, Union[int, float]] = Field(default_factory=dict)
    expected_relative_degree: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_matrices(self):
        if self.kind == "explicit" and (self.A is None or self.B is None or self.C is None):
            raise ValueError("explicit models need A, B and C")
        if self.kind != "explicit" and (self.A is not None or self.B is not None or self.C is not None):
            raise ValueError(f"{self.kind} models are generated; A, B and C must not be given")
        return self

    def build(self):
        """The AgentModel described by this entry."""
        Sigma_w = None if self.Sigma_w is None else self.Sigma_w.to_array()
        Sigma_v = None if self.Sigma_v is None else self.Sigma_v.to_array()
        if self.kind == "explicit":
            return AgentModel(self.A.to_array(), self.B.to_array(), self.C.to_array(),
                              Sigma_w=Sigma_w, Sigma_v=Sigma_v, name=self.name)
        return MODEL_GENERATORS[self.kind](Sigma_w=Sigma_w, Sigma_v=Sigma_v, name=self.name, **self.params)


class AgentSpec(BaseModel):
    """``count`` agents of model ``model`` whose initial mean state is ``x0``."""
    model_config = ConfigDict(extra="forbid")

    model: str
    x0: list[float]
    init_cov: Optional[MatrixSpec] = None
    count: int = Field(1, ge=1)


class FieldSpec(BaseModel):
    """The target samples: explicit ``points`` or a generator with parameters and seed."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["points", "grid", "ring", "torus", "gaussian_mixture"]
    points: Optional[list[list[float]]] = None
    params: dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def check_points(self):
        if self.kind == "points" and not self.points:
            raise ValueError("a points field needs a nonempty list of points")
        if self.kind != "points" and self.points is not None:
            raise ValueError("points are only allowed for kind = 'points'")
        return self

    def build(self):
        if self.kind == "points":
            return np.array(self.points, dtype=float)
        kwargs = dict(self.params)
        if self.kind in SEEDED_FIELDS:
            kwargs["seed"] = self.seed
        return FIELD_GENERATORS[self.kind](**kwargs)


class ControlSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    horizon: int = Field(1, ge=1)
    constraint: Literal["none", "box", "ball"] = "box"
    u_min: Optional[list[float]] = None
    u_max: Optional[list[float]] = None
    ball_radius: Optional[float] = Field(None, gt=0)
    r_scale: float = Field(0.01, gt=0)
    estimator: Literal["oracle", "kalman"] = "oracle"
    confidence: float = Field(0.95, gt=0, lt=1)


class CoverageSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    policy: Literal["density", "greedy_baseline"] = "density"
    selection: Literal["hard", "soft"] = "hard"
    soft_lambda: float = Field(1.0, gt=0)
    k_nn: int = Field(25, ge=1)
    comm_range: float = Field(5.0, gt=0)
    weight_update: Literal["transport", "radius"] = "transport"
    radius_sigma: float = Field(0.5, gt=0)
    on_exhaustion: Literal["idle", "reset"] = "idle"


class RunSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mission_length: int = Field(ge=1)
    runs: int = Field(1, ge=1)
    base_seed: int = Field(0, ge=0)
    w2_stride: int = Field(5, ge=1)
    w2_subsample: int = Field(1000, ge=1)
    ellipsoid_diagnostics: bool = False


class ScenarioConfig(BaseModel):
    """
    A complete scenario. Field-level problems are reported by pydantic; the cross-section
    checks below are collected into one error listing every violation.
    """
    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    description: str = ""
    models: list[ModelSpec] = Field(min_length=1)
    agents: list[AgentSpec] = Field(min_length=1)
    field: FieldSpec
    control: ControlSpec = Field(default_factory=ControlSpec)
    coverage: CoverageSpec = Field(default_factory=CoverageSpec)
    run: RunSpec

    @model_validator(mode="after")
    def check_consistency(self):
        violations = consistency_violations(self)
        if violations:
            raise ValueError("; ".join(violations))
        return self

    @property
    def num_agents(self):
        return sum(a.count for a in self.agents)


def consistency_violations(config):
    """
    Cross-section checks of a scenario. Returns a list of ``"section.field: message"`` strings.
    """
    violations = list()
    models = dict()
    for i, spec in enumerate(config.models):
        if spec.name in models:
            violations.append(f"models[{i}].name: duplicate model name {spec.name!r}")
            continue
        try:
            model = spec.build()
        except (AssertionError, ValueError, TypeError) as err:
            violations.append(f"models[{i}]: {err}")
            continue
        models[spec.name] = model
        r = relative_degree(model)
        if r is None:
            violations.append(f"models[{i}]: the output relative degree is undefined (C A^k B = 0 for all k)")
        elif spec.expected_relative_degree is not None and r != spec.expected_relative_degree:
            violations.append(f"models[{i}].expected_relative_degree: model has r = {r}, expected {spec.expected_relative_degree}")

    for i, spec in enumerate(config.agents):
        if spec.model not in models:
            if spec.model not in [m.name for m in config.models]:
                violations.append(f"agents[{i}].model: unknown model {spec.model!r}")
            continue
        n = models[spec.model].n
        if len(spec.x0) != n:
            violations.append(f"agents[{i}].x0: has {len(spec.x0)} entries, model {spec.model!r} has n = {n}")
        if spec.init_cov is not None and tuple(spec.init_cov.shape) != (n, n):
            violations.append(f"agents[{i}].init_cov: shape {tuple(spec.init_cov.shape)} does not match n = {n}")

    output_dims = {m.d for m in models.values()}
    input_dims = {m.m for m in models.values()}
    if len(output_dims) > 1:
        violations.append(f"models: all models must share the output dimension, found {sorted(output_dims)}")

    try:
        samples = config.field.build()
        samples = samples.reshape(-1, 1) if samples.ndim == 1 else samples
        if len(output_dims) == 1 and samples.shape[1] not in output_dims:
            violations.append(f"field: samples have dimension {samples.shape[1]}, agent outputs have {output_dims.pop()}")
    except (AssertionError, ValueError, TypeError) as err:
        violations.append(f"field: {err}")

    control = config.control
    if control.constraint == "box":
        if control.u_min is None or control.u_max is None:
            violations.append("control.u_min: box constraints need u_min and u_max")
        else:
            if len(control.u_min) != len(control.u_max):
                violations.append("control.u_max: u_min and u_max must have the same length")
            elif any(lo > hi for lo, hi in zip(control.u_min, control.u_max)):
                violations.append("control.u_min: a lower bound exceeds its upper bound")
            for m in input_dims:
                if len(control.u_min) != m:
                    violations.append(f"control.u_min: has {len(control.u_min)} entries, models have m = {m}")
    if control.constraint == "ball" and control.ball_radius is None:
        violations.append("control.ball_radius: ball constraints need a radius")

    return violations


def build_models(config):
    return {spec.name: spec.build() for spec in config.models}


def build_field(config):
    return SampleField(config.field.build(), config.num_agents)


def build_settings(config):
    """CoverageSettings with the per-step agent mass 1 / mission_length."""
    control, coverage = config.control, config.coverage
    return CoverageSettings(
        alpha=1.0 / config.run.mission_length,
        horizon=control.horizon,
        constraint=control.constraint,
        u_min=None if control.u_min is None else np.array(control.u_min),
        u_max=None if control.u_max is None else np.array(control.u_max),
        ball_radius=control.ball_radius,
        r_scale=control.r_scale,
        selection=coverage.selection,
        soft_lambda=coverage.soft_lambda,
        k_nn=coverage.k_nn,
        comm_range=coverage.comm_range,
        weight_update=coverage.weight_update,
        radius_sigma=coverage.radius_sigma,
        on_exhaustion=coverage.on_exhaustion,
        policy=coverage.policy,
        confidence=control.confidence,
    )


def build_agents(config, seed):
    """
    The agents of one run. Every agent gets its own random stream spawned from ``seed``;
    the initial true state is drawn around ``x0`` with the configured perturbation covariance.

    Returns:
        tuple: (list of Agent, np.random.Generator for evaluation subsampling)
    """
    models = build_models(config)
    streams = np.random.SeedSequence(seed).spawn(config.num_agents + 1)
    agents = list()
    for spec in config.agents:
        model = models[spec.model]
        mu0 = np.array(spec.x0, dtype=float)
        for _ in range(spec.count):
            rng = np.random.default_rng(streams[len(agents)])
            x0 = mu0 if spec.init_cov is None else rng.multivariate_normal(mu0, spec.init_cov.to_array())
            agents.append(Agent(len(agents), model, x0, mu0, rng, config.control.horizon,
                                estimator=config.control.estimator))
    return agents, np.random.default_rng(streams[-1])


def bundled_scenarios():
    """Names of the scenarios shipped with the package."""
    folder = resources.files("density_coverage") / "scenarios"
    return sorted(p.name[:-len(".toml")] for p in folder.iterdir() if p.name.endswith(".toml"))


def bundled_scenario_path(name):
    """Path of a bundled scenario, by name with or without the .toml suffix."""
    name = name if name.endswith(".toml") else f"{name}.toml"
    path = resources.files("density_coverage") / "scenarios" / name
    assert path.is_file(), f"No bundled scenario named {name!r}."
    return path
