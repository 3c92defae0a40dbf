"""Run configuration: JSON file merged with command-line overrides."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ParameterError
from .grid import Scheme
from .model import make_model


@dataclass
class ModelBlock:
    family: str = "MTM"
    k: float = 1.0
    m: float = 1.0


@dataclass
class SweepBlock:
    omega_min: float | None = None  # default: model range
    omega_max: float | None = None
    count: int = 200
    adaptive: bool = True


@dataclass
class NumericsBlock:
    R: float | None = None  # default max(30, 30/kappa)
    M: int = 511
    scheme: str = "fourier"
    stretch: str | float | None = "auto"
    delta_omega: float = 1e-4
    resolution_tol: float = 1e-4
    matching_radius: float = 0.05
    root_xtol: float = 1e-6
    workers: int = 1


@dataclass
class OutputBlock:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv"])
    cache_dir: str | None = None  # default <directory>/cache


@dataclass
class RunConfig:
    model: ModelBlock = field(default_factory=ModelBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    numerics: NumericsBlock = field(default_factory=NumericsBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def as_dict(self) -> dict:
        return asdict(self)

    def make_model(self):
        return make_model(self.model.family, self.model.k, self.model.m)

    def validate(self) -> "RunConfig":
        model = self.make_model()
        Scheme.parse(self.numerics.scheme)
        n = self.numerics
        if int(n.M) != n.M or n.M < 64:
            raise ParameterError(f"M must be an integer >= 64, got {n.M}")
        n.M = int(n.M)
        if n.R is not None and not n.R > 0:
            raise ParameterError("R must be positive")
        if isinstance(n.stretch, str) and n.stretch not in ("auto", "none"):
            raise ParameterError("stretch must be 'auto', 'none' or a positive number")
        if n.stretch == "none":
            n.stretch = None
        for name in ("delta_omega", "resolution_tol", "matching_radius", "root_xtol"):
            if not getattr(n, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if int(n.workers) < 1:
            raise ParameterError("workers must be >= 1")
        s = self.sweep
        if int(s.count) < 1:
            raise ParameterError("sweep count must be >= 1")
        s.count = int(s.count)
        for w in (s.omega_min, s.omega_max):
            if w is not None and abs(w) > model.m:
                raise ParameterError(f"sweep bound {w} outside [-m, m]")
        if s.omega_min is not None and s.omega_max is not None and s.omega_min >= s.omega_max:
            raise ParameterError("omega_min must be below omega_max")
        bad = [f for f in self.output.formats if f not in ("csv", "json")]
        if bad:
            raise ParameterError(f"unknown output formats {bad}")
        return self


_BLOCKS = {"model": ModelBlock, "sweep": SweepBlock, "numerics": NumericsBlock, "output": OutputBlock}


def config_from_dict(data: dict) -> RunConfig:
    cfg = RunConfig()
    unknown = set(data) - set(_BLOCKS)
    if unknown:
        raise ParameterError(f"unknown config sections {sorted(unknown)}")
    for name, cls in _BLOCKS.items():
        block = data.get(name, {}) or {}
        allowed = {f.name for f in fields(cls)}
        extra = set(block) - allowed
        if extra:
            raise ParameterError(f"unknown keys in [{name}]: {sorted(extra)}")
        setattr(cfg, name, cls(**{**asdict(cls()), **block}))
    return cfg


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParameterError("config root must be an object")
    return config_from_dict(data)


# Figure presets: model, sweep range and numerics of each reproduction.
PRESETS = {
    "fig1": [{"model": {"family": "MTM", "k": 0.5}, "sweep": {"omega_min": -1.0, "omega_max": 1.0}}],
    "fig2": [{"model": {"family": "MTM", "k": 1.0}, "sweep": {"omega_min": -1.0, "omega_max": 1.0}}],
    "fig3": [{"model": {"family": "MTM", "k": 2.0}, "sweep": {"omega_min": -1.0, "omega_max": 1.0}}],
    "fig4": [{"model": {"family": "MTM", "k": 3.0}, "sweep": {"omega_min": -1.0, "omega_max": 1.0}}],
    "fig5": [{"model": {"family": "GN", "k": 0.5}, "sweep": {"omega_min": 0.0, "omega_max": 1.0}},
             {"model": {"family": "GN", "k": 1.0}, "sweep": {"omega_min": 0.0, "omega_max": 1.0}}],
    "fig6": [{"model": {"family": "GN", "k": 2.0}, "sweep": {"omega_min": 0.0, "omega_max": 1.0}},
             {"model": {"family": "GN", "k": 3.0}, "sweep": {"omega_min": 0.0, "omega_max": 1.0}}],
}
