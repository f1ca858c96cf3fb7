"""Run configuration: defaults, flat ``key=value`` files and named sub-seeds."""

from __future__ import annotations

import os
import zlib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from fairfront.dataset import DIALECT_CELLS, SynthConfig
from fairfront.pareto import default_alphas

OUT_ENV = "FAIRFRONT_OUT"


@dataclass
class RunConfig:
    data: str | None = None  # CSV path; None selects the synthetic preset
    cells: tuple[int, int, int, int] = DIALECT_CELLS
    feature_dim: int = 8
    separation: tuple[float, float] = (1.6, 4.5)
    group_shift: float = 1.0
    noise_scale: float = 1.0
    layout: str = "split"
    train_fraction: float = 0.8
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    steps: int = 4000
    batch_size: int | None = None
    cba_mode: str = "normalized"
    alphas: tuple[float, ...] = field(default_factory=lambda: tuple(default_alphas()))
    epsilon: float = 1e-3
    warm_start: bool = True
    seed: int = 0
    out: str = "runs/default"

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            cells=self.cells,
            feature_dim=self.feature_dim,
            separation=self.separation,
            group_shift=self.group_shift,
            noise_scale=self.noise_scale,
            layout=self.layout,
            seed=sub_seed(self.seed, "synth"),
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        return cls(**{k: _coerce(k, v) for k, v in obj.items() if k in known})


def sub_seed(seed: int, name: str) -> int:
    """Independent, stable seed for the component called ``name``."""
    ss = np.random.SeedSequence([seed, zlib.crc32(name.encode())])
    return int(ss.generate_state(1)[0])


_TUPLE_INT = {"cells"}
_TUPLE_FLOAT = {"separation", "alphas"}
_INT = {"feature_dim", "steps", "seed", "batch_size"}
_FLOAT = {"group_shift", "noise_scale", "train_fraction", "learning_rate", "beta1",
          "beta2", "epsilon"}


def _coerce(key: str, value):
    if isinstance(value, str):
        value = value.strip()
        if key in _TUPLE_INT | _TUPLE_FLOAT:
            value = [v for v in value.split(",") if v.strip()]
        elif value.lower() in ("", "none", "null"):
            return None
    if value is None:
        return None
    if key in _TUPLE_INT:
        return tuple(int(v) for v in value)
    if key in _TUPLE_FLOAT:
        return tuple(float(v) for v in value)
    if key in _INT:
        v = int(value)
        return None if key == "batch_size" and v <= 0 else v
    if key in _FLOAT:
        return float(value)
    if key == "warm_start":
        if isinstance(value, str):
            return value.lower() in ("1", "true", "yes", "on")
        return bool(value)
    return str(value)


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in {f.name for f in fields(RunConfig)}:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def resolve_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the config file, then explicit overrides.

    The output directory may also come from the ``FAIRFRONT_OUT`` environment
    variable, which ranks below an explicit override.
    """
    merged: dict = {}
    if path is not None:
        merged.update(read_config_file(path))
    if os.environ.get(OUT_ENV):
        merged["out"] = os.environ[OUT_ENV]
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    cfg = RunConfig.from_dict(merged)
    if cfg.cba_mode not in ("normalized", "literal"):
        raise ValueError(f"cba_mode must be normalized or literal, got {cfg.cba_mode!r}")
    return cfg
