"""Run configuration for the command-line experiments.

A JSON config mirrors :class:`RunConfig`: top-level sections ``physics``,
``prep``, ``optimizer``, ``ensemble`` and ``experiment``, each holding the
fields of the matching dataclass.  Unknown keys are rejected.  ``null`` or
``"inf"`` for ``physics.t2e`` means no homogeneous decay.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

from .correlations import OptimizerConfig
from .dynamics import EnsembleModel, PhysicsParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PrepConfig:
    theta1_pi: float = 0.70
    theta2_pi: float = 0.28
    f: float | None = None  # None -> cos(theta2)

    @property
    def theta1(self) -> float:
        return self.theta1_pi * math.pi

    @property
    def theta2(self) -> float:
        return self.theta2_pi * math.pi

    @property
    def damping(self) -> float:
        return math.cos(self.theta2) if self.f is None else self.f


@dataclass(frozen=True)
class EnsembleConfig:
    quadrature_order: int = 64
    electron_grid: bool = True
    nuclear_grid: bool = True

    def model(self, p: PhysicsParams) -> EnsembleModel:
        return EnsembleModel.from_params(p, self.quadrature_order, self.electron_grid, self.nuclear_grid)


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "ensemble"
    t_max_ns: float = 500.0
    points: int = 200
    tau_ns: float = 10_000.0
    tau_points: int = 40
    tau4_ns: float = 1000.0
    n_blocks: int = 3
    samples_per_block: int = 8
    seed: int = 0
    error_samples: int = 0
    element_error_eps: float = 0.03


@dataclass(frozen=True)
class RunConfig:
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    prep: PrepConfig = field(default_factory=PrepConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

    def __post_init__(self):
        ex = self.experiment
        if ex.model not in ("analytic", "ensemble"):
            raise ConfigError(f"experiment.model must be 'analytic' or 'ensemble', not {ex.model!r}")
        for name in ("points", "tau_points", "n_blocks", "samples_per_block"):
            if getattr(ex, name) < 1:
                raise ConfigError(f"experiment.{name} must be >= 1")
        for name in ("t_max_ns", "tau_ns", "tau4_ns"):
            if not getattr(ex, name) > 0:
                raise ConfigError(f"experiment.{name} must be positive")
        if ex.error_samples < 0 or ex.element_error_eps < 0 or ex.seed < 0:
            raise ConfigError("seed, error_samples and element_error_eps must be non-negative")
        if not 0.0 <= self.prep.damping <= 1.0:
            raise ConfigError("prep.f must lie in [0, 1]")

    def with_experiment(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, experiment=dataclasses.replace(self.experiment, **changes))


_SECTIONS = {
    "physics": PhysicsParams,
    "prep": PrepConfig,
    "optimizer": OptimizerConfig,
    "ensemble": EnsembleConfig,
    "experiment": ExperimentConfig,
}


def _build(cls, data, section: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a JSON object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {sorted(unknown)}")
    data = dict(data)
    if section == "physics" and "t2e" in data and data["t2e"] in (None, "inf", "Infinity"):
        data["t2e"] = math.inf
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {section!r} section: {exc}") from exc


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    parts = {name: _build(cls, data[name], name) for name, cls in _SECTIONS.items() if name in data}
    try:
        return RunConfig(**parts)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)


def config_to_dict(cfg: RunConfig) -> dict:
    out = dataclasses.asdict(cfg)
    if math.isinf(out["physics"]["t2e"]):
        out["physics"]["t2e"] = None
    return out
