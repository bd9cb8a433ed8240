"""Run configuration: a flat key=value file with sections, flags override.

The same `RunConfig` feeds every CLI command; unknown keys are rejected
so typos fail loudly. `config_hash` is embedded in every output for
provenance.
"""

from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass, fields

from .errors import ConfigError

_SECTIONS = {
    "run": ("seed", "dim", "levels", "mode", "threads"),
    "data": (
        "data_source",
        "data_path",
        "labels_path",
        "label_column",
        "has_header",
        "n_features",
        "n_classes",
        "samples_per_class",
        "noise",
        "grid_levels",
    ),
    "lock": ("locked", "pool_size", "layers"),
    "attack": (
        "shuffle_seed",
        "attacker_seed",
        "reconstruction",
        "budget",
        "trace_positions",
        "endpoint_gap",
        "min_separation",
    ),
}


@dataclass
class RunConfig:
    # [run]
    seed: int = 1
    dim: int = 4096
    levels: int = 8
    mode: str = "binary"
    threads: int = 0  # 0 = use available parallelism
    # [data]
    data_source: str = "synthetic"
    data_path: str = ""
    labels_path: str = ""
    label_column: int = -1
    has_header: bool = False
    n_features: int = 128
    n_classes: int = 4
    samples_per_class: int = 200
    noise: float = 0.2
    grid_levels: int = 8
    # [lock]
    locked: bool = False
    pool_size: int = 0  # 0 = n_features
    layers: int = 1
    # [attack]
    shuffle_seed: int = 99
    attacker_seed: int = 0
    reconstruction: str = "rebind"
    budget: int = 0  # 0 = unlimited
    trace_positions: int = 0
    endpoint_gap: float = 0.01
    min_separation: float = 0.1

    def validate(self) -> "RunConfig":
        if self.mode not in ("binary", "non-binary"):
            raise ConfigError(f"mode must be binary or non-binary, got {self.mode!r}")
        if self.dim < 1 or self.levels < 2:
            raise ConfigError("dim must be >= 1 and levels >= 2")
        if self.locked and self.layers < 1:
            raise ConfigError("locked mode needs layers >= 1")
        if not self.locked and (self.pool_size or self.layers > 1):
            raise ConfigError("lock parameters set but lock.locked is false")
        if self.reconstruction not in ("rebind", "retrain"):
            raise ConfigError(
                f"reconstruction must be rebind or retrain, got {self.reconstruction!r}"
            )
        if self.data_source not in ("synthetic", "csv", "idx"):
            raise ConfigError(f"unknown data source {self.data_source!r}")
        if not 0 <= self.noise < 0.5:
            raise ConfigError("noise must be in [0, 0.5)")
        return self

    @property
    def effective_pool_size(self) -> int:
        return self.pool_size if self.pool_size else self.n_features

    @property
    def effective_threads(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    raw = raw.strip()
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer, got {raw!r}") from None
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{name}: expected a number, got {raw!r}") from None
    return raw


def load_config(path: str) -> RunConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    cfg = RunConfig()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            setattr(cfg, key, _parse_value(key, raw))
    return cfg.validate()


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Apply non-None CLI flag values on top of the file config."""
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config field {key!r}")
        setattr(cfg, key, value)
    return cfg.validate()


def config_hash(cfg: RunConfig) -> str:
    lines = [f"{f.name}={getattr(cfg, f.name)!r}" for f in fields(RunConfig)]
    return hashlib.sha256("\n".join(sorted(lines)).encode("utf-8")).hexdigest()
