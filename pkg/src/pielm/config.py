"""Experiment configuration: defaults per problem, strict file parsing, overrides."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .features import Activation
from .lstsq import SolveMethod

__all__ = ["ConfigError", "Seeds", "ExperimentConfig", "parse_config", "default_betas"]

log = logging.getLogger(__name__)

PROBLEMS = ("heat", "black_scholes", "heston")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class Seeds:
    weights: int = 1
    collocation: int = 2
    boundary_mc: int = 3
    test: int = 4
    oracle: int = 5

    def shifted(self, offset: int) -> "Seeds":
        """Seeds of repeat ``offset``: new weights and collocation, same test set and oracle."""
        return dataclasses.replace(
            self,
            weights=self.weights + 1000 * offset,
            collocation=self.collocation + 1000 * offset,
            boundary_mc=self.boundary_mc + 1000 * offset,
        )


# (beta1, beta2) of the benchmark grid rows, keyed by (problem, d)
_TABLE_BETAS = {
    ("black_scholes", 50): (5.0, 100.0),
    ("black_scholes", 100): (5.0, 100.0),
    ("heston", 2): (800.0, 800.0),
    ("heston", 4): (5.0, 50.0),
    ("heston", 50): (10.0, 100.0),
    ("heston", 100): (10.0, 100.0),
}


def default_betas(problem: str, d: int) -> tuple[float, float]:
    if problem == "heat":
        return 1.0, 1.0
    return _TABLE_BETAS.get((problem, d), (5.0, 10.0))


_PROBLEM_DEFAULTS = {
    "heat": dict(
        n_int=8192, n_sb=2048, n_tb=6144, n_s=0, weight_range=(-0.01, 0.01), n_test=100_000, oracle_samples=0
    ),
    "black_scholes": dict(
        n_int=32768, n_sb=16384, n_tb=16384, n_s=16384, weight_range=(-0.1, 0.1), n_test=4096, oracle_samples=65536
    ),
    "heston": dict(
        n_int=32768, n_sb=16384, n_tb=16384, n_s=16384, weight_range=(-0.1, 0.1), n_test=4096, oracle_samples=65536
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    d: int
    activation: Activation = Activation.TANH
    width: int = 800
    n_int: int = 8192
    n_sb: int = 2048
    n_tb: int = 6144
    n_s: int = 0
    n_test: int = 100_000
    oracle_samples: int = 0
    oracle_shared_noise: bool = True
    weight_range: tuple[float, float] = (-0.01, 0.01)
    beta1: float = 1.0
    beta2: float = 1.0
    backend: str = "analytic"
    solver: SolveMethod = SolveMethod.SVD
    rcond: float = 1e-14
    seeds: Seeds = field(default_factory=Seeds)
    repeats: int = 1

    def __post_init__(self):
        _validate(self)

    @classmethod
    def for_problem(cls, problem: str, d: int, **overrides) -> "ExperimentConfig":
        """Config with the benchmark settings of ``problem`` filled in."""
        if problem not in PROBLEMS:
            raise ConfigError(f"problem: unknown problem {problem!r}; expected one of {PROBLEMS}")
        base = dict(_PROBLEM_DEFAULTS[problem])
        b1, b2 = default_betas(problem, int(d))
        base.update(beta1=b1, beta2=b2)
        base.update(overrides)
        return cls(problem=problem, d=int(d), **base)

    def for_repeat(self, r: int) -> "ExperimentConfig":
        return dataclasses.replace(self, seeds=self.seeds.shifted(r))

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["activation"] = self.activation.value
        out["solver"] = self.solver.value
        out["weight_range"] = list(self.weight_range)
        return out

    def build_problem(self):
        from .problems import make_black_scholes_problem, make_heat_problem, make_heston_problem

        if self.problem == "heat":
            return make_heat_problem(self.d)
        mc = dict(
            n_samples=self.n_s,
            mc_seed=self.seeds.boundary_mc,
            oracle_samples=self.oracle_samples,
            oracle_seed=self.seeds.oracle,
            oracle_shared_noise=self.oracle_shared_noise,
        )
        if self.problem == "black_scholes":
            return make_black_scholes_problem(self.d, **mc)
        return make_heston_problem(self.d, **mc)


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.problem not in PROBLEMS:
        raise ConfigError(f"problem: unknown problem {cfg.problem!r}; expected one of {PROBLEMS}")
    try:
        object.__setattr__(cfg, "activation", Activation.parse(cfg.activation))
    except ValueError as exc:
        raise ConfigError(f"activation: {exc}") from None
    try:
        object.__setattr__(cfg, "solver", SolveMethod(str(getattr(cfg.solver, "value", cfg.solver)).lower()))
    except ValueError:
        raise ConfigError(f"solver: unknown solver {cfg.solver!r}; expected 'svd' or 'qr'") from None
    if cfg.backend not in ("analytic", "fd"):
        raise ConfigError(f"backend: unknown backend {cfg.backend!r}; expected 'analytic' or 'fd'")
    if isinstance(cfg.seeds, Mapping):
        object.__setattr__(cfg, "seeds", _build_seeds(cfg.seeds))
    object.__setattr__(cfg, "weight_range", tuple(float(v) for v in cfg.weight_range))
    if len(cfg.weight_range) != 2 or not cfg.weight_range[0] < cfg.weight_range[1]:
        raise ConfigError(f"weight_range: need [low, high] with low < high, got {list(cfg.weight_range)}")
    for name in ("d", "width", "n_int", "n_sb", "n_tb", "n_test", "repeats"):
        if int(getattr(cfg, name)) < 1:
            raise ConfigError(f"{name}: must be a positive integer, got {getattr(cfg, name)}")
    if cfg.problem != "heat":
        for name in ("n_s", "oracle_samples"):
            if int(getattr(cfg, name)) < 1:
                raise ConfigError(f"{name}: must be a positive integer for {cfg.problem}, got {getattr(cfg, name)}")
    if cfg.problem == "heston" and cfg.d % 2:
        raise ConfigError(f"d: heston requires an even dimension, got {cfg.d}")
    for name in ("beta1", "beta2"):
        if not float(getattr(cfg, name)) > 0:
            raise ConfigError(f"{name}: must be positive, got {getattr(cfg, name)}")
    if not 0.0 <= cfg.rcond < 1.0:
        raise ConfigError(f"rcond: must lie in [0, 1), got {cfg.rcond}")


_SEED_FIELDS = {f.name for f in dataclasses.fields(Seeds)}
_CONFIG_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _build_seeds(values: Mapping[str, Any]) -> Seeds:
    for key in values:
        if key not in _SEED_FIELDS:
            raise ConfigError(f"seeds.{key}: unknown key")
    return Seeds(**{k: int(v) for k, v in values.items()})


def parse_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """Load a YAML config, apply ``overrides`` (e.g. from CLI flags) and validate.

    Unknown keys are rejected. Missing keys fall back to the benchmark
    settings of the chosen problem. ``overrides`` may carry ``seeds`` as a
    partial mapping; it is merged into the file's seeds.
    """
    raw: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        raw.update(loaded)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "seeds":
            merged = dict(raw.get("seeds") or {})
            merged.update({k: v for k, v in value.items() if v is not None})
            raw["seeds"] = merged
        else:
            raw[key] = value
    for key in raw:
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"{key}: unknown key")
    if "problem" not in raw:
        raise ConfigError("problem: required")
    if "d" not in raw:
        raise ConfigError("d: required")
    problem, d = raw.pop("problem"), raw.pop("d")
    seeds = raw.pop("seeds", None)
    if seeds is not None:
        if not isinstance(seeds, Mapping):
            raise ConfigError("seeds: must be a mapping")
        raw["seeds"] = _build_seeds(seeds)
    try:
        d = int(d)
    except (TypeError, ValueError):
        raise ConfigError(f"d: must be an integer, got {d!r}") from None
    cfg = ExperimentConfig.for_problem(str(problem), d, **raw)
    log.info("effective config: %s", cfg.to_dict())
    return cfg
