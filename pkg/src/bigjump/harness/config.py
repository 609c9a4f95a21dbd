"""Experiment configuration: defaults, file parsing, validation.

Config files are line-oriented ``key=value`` text; blank lines and lines
starting with ``#`` are skipped; the value is everything after the first
``=`` (so law config strings may themselves contain ``=``).  Unknown keys
are errors.  List values are comma-separated.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional, Tuple

from ..heavytail import StepLaw, step_law_from_config
from ..offspring import OffspringLaw, offspring_from_config

__all__ = ["ConfigError", "ExperimentConfig", "parse_config_text", "load_config"]

EXPERIMENTS = ("thm1", "thm2", "prop1", "gw_verify", "calibrate")


class ConfigError(ValueError):
    """Invalid configuration (unknown key, bad value, missing file)."""


def _ints(text: str) -> Tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip())


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    step: str = "kind=pareto;shape=symmetric;alpha=3.0;xmin=1.0"
    offspring: str = "family=geometric_half"
    tree: str = "gw"                      # gw | star (iid control for thm1)
    sizes: Tuple[int, ...] = (1000, 10000, 100000)
    x_grid: Tuple[float, ...] = (5.0, 7.5, 10.0, 15.0, 20.0, 25.0, 30.0)
    k: int = 2
    replicas: int = 1000
    cap: int = 10 ** 7
    base_seed: int = 0
    threads: int = 1
    out_path: str = ""
    fmt: str = "jsonl"
    # prop1 knobs
    trees: int = 50
    walks: int = 10000
    epsilon: float = 0.1
    z_mults: Tuple[float, ...] = (1.0, 2.0)
    y_over_z: Tuple[float, ...] = (1.0, 2.0, 4.0)
    c_hat: Optional[float] = None
    # calibrate knobs
    n_grid: Tuple[int, ...] = (100, 1000, 10000)
    x_over_y: Tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0)
    reps: int = 2000
    # gw_verify knobs
    free_samples: int = 10 ** 6
    height_sample: int = 10 ** 5
    heights: Tuple[int, ...] = (1, 5, 20)
    eps_grid: Tuple[float, ...] = (0.05, 0.1)
    tv_draws: int = 10 ** 5
    tv_cap: int = 10 ** 5

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if self.cap < 1:
            raise ConfigError("cap must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.fmt not in ("csv", "jsonl"):
            raise ConfigError(f"format must be csv or jsonl, got {self.fmt!r}")
        if self.tree not in ("gw", "star"):
            raise ConfigError(f"tree must be gw or star, got {self.tree!r}")
        for name in ("sizes", "x_grid", "n_grid", "heights", "z_mults",
                     "y_over_z", "x_over_y", "eps_grid"):
            grid = getattr(self, name)
            if len(grid) == 0:
                raise ConfigError(f"{name} must be non-empty")
            if list(grid) != sorted(grid):
                raise ConfigError(f"{name} must be sorted ascending")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        self.step_law()       # validate law strings eagerly
        self.offspring_law()

    # parsed laws (constructed on demand; config strings stay the source of truth)
    def step_law(self) -> StepLaw:
        try:
            return step_law_from_config(self.step)
        except ValueError as e:
            raise ConfigError(f"bad step law: {e}") from e

    def offspring_law(self) -> OffspringLaw:
        try:
            return offspring_from_config(self.offspring)
        except ValueError as e:
            raise ConfigError(f"bad offspring law: {e}") from e

    def echo(self) -> dict:
        # out_path and fmt are delivery parameters: reports written to two
        # different files from one experiment must stay byte-identical
        out = {}
        for f in fields(self):
            if f.name in ("out_path", "fmt"):
                continue
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


_CASTERS = {
    "experiment": str,
    "step": str,
    "offspring": str,
    "tree": str,
    "sizes": _ints,
    "x_grid": _floats,
    "k": int,
    "replicas": int,
    "cap": int,
    "base_seed": int,
    "threads": int,
    "out": str,
    "format": str,
    "trees": int,
    "walks": int,
    "epsilon": float,
    "z_mults": _floats,
    "y_over_z": _floats,
    "c_hat": float,
    "n_grid": _ints,
    "x_over_y": _floats,
    "reps": int,
    "free_samples": int,
    "height_sample": int,
    "heights": _ints,
    "eps_grid": _floats,
    "tv_draws": int,
    "tv_cap": int,
}

_RENAMES = {"out": "out_path", "format": "fmt"}


def parse_config_text(text: str) -> dict:
    """key=value lines to a raw string mapping; unknown keys are errors."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {stripped!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if key not in _CASTERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return raw


def build_config(raw: dict, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Construct a validated config from raw string mappings."""
    merged = dict(raw)
    if overrides:
        for key, value in overrides.items():
            if key not in _CASTERS:
                raise ConfigError(f"unknown key {key!r}")
            if value is not None:
                merged[key] = value
    if "experiment" not in merged:
        raise ConfigError("config requires experiment=")
    kwargs = {}
    for key, value in merged.items():
        caster = _CASTERS[key]
        try:
            cast = caster(value) if isinstance(value, str) else value
        except ValueError as e:
            raise ConfigError(f"bad value for {key!r}: {e}") from e
        kwargs[_RENAMES.get(key, key)] = cast
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def load_config(path: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path!r}: {e}") from e
    return build_config(parse_config_text(text), overrides)
