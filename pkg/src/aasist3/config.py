"""Configuration documents: model, training and metric settings in one YAML file."""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .encoder import EncoderConfig
from .errors import ConfigError


@dataclass
class ModelConfig:
    sample_rate: int = 16000
    input_seconds: float = 4.0
    hop_seconds: float = 2.0
    pre_emphasis: float = 0.97
    n_filters: int = 70
    kernel_len: int = 129
    f_min: float = 200.0
    f_max: float = 8000.0
    sinc_stride: int = 1
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    graph_dim: int = 32
    pool_ratios: list = field(default_factory=lambda: [0.5, 0.7, 0.5])
    temperature: float = 100.0
    graph_dropout: float = 0.2
    readout_dropout: list = field(default_factory=lambda: [0.2, 0.5])
    n_branches: int = 4
    stack_combine: str = "max"
    grid_range: list = field(default_factory=lambda: [-1.0, 1.0])
    grid_size: int = 16
    spline_order: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.sample_rate != 16000:
            raise ConfigError("model.sample_rate", "only 16000 Hz is supported")
        if not self.input_seconds > self.hop_seconds > 0:
            raise ConfigError("model.hop_seconds", "need input_seconds > hop_seconds > 0")
        if self.stack_combine not in ("max", "sum"):
            raise ConfigError("model.stack_combine", "must be 'max' or 'sum'")
        if len(self.pool_ratios) != 3 or not all(0 < r <= 1 for r in self.pool_ratios):
            raise ConfigError("model.pool_ratios", "need three ratios in (0, 1]")
        if len(self.readout_dropout) != 2:
            raise ConfigError("model.readout_dropout", "need two probabilities")
        if self.n_branches < 1:
            raise ConfigError("model.n_branches", "need at least one branch")
        if self.temperature <= 0:
            raise ConfigError("model.temperature", "must be positive")

    @property
    def input_samples(self) -> int:
        return int(round(self.input_seconds * self.sample_rate))


@dataclass
class TrainConfig:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 8
    epochs: int = 10
    class_weights: list = field(default_factory=lambda: [1.0, 1.0])
    seed: int = 0
    checkpoint_every: int = 1

    def __post_init__(self):
        for name in ("lr", "eps", "batch_size", "epochs", "checkpoint_every"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"train.{name}", "must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("train.beta1", "Adam betas must lie in [0, 1)")
        if len(self.class_weights) != 2 or any(w <= 0 for w in self.class_weights):
            raise ConfigError("train.class_weights", "need two positive weights (spoof, bonafide)")


@dataclass
class MetricConfig:
    p_target: float = 0.05
    c_miss: float = 1.0
    c_fa: float = 10.0

    def __post_init__(self):
        if not 0 < self.p_target < 1:
            raise ConfigError("metrics.p_target", "must lie in (0, 1)")
        if self.c_miss <= 0 or self.c_fa <= 0:
            raise ConfigError("metrics.c_miss", "costs must be positive")


@dataclass
class Config:
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    metrics: MetricConfig = field(default_factory=MetricConfig)


def pocket_model_config(**overrides) -> ModelConfig:
    """The tiny configuration used for gradient checks and toy training."""
    params = dict(
        n_filters=8,
        kernel_len=17,
        sinc_stride=8,
        encoder=EncoderConfig(channels=[8, 8], input_pool=(1, 5), block_pools=[(1, 7), (1, 7)]),
        graph_dim=8,
        n_branches=2,
        graph_dropout=0.0,
        readout_dropout=[0.0, 0.1],
    )
    params.update(overrides)
    return ModelConfig(**params)


def to_dict(obj) -> dict:
    def convert(value):
        if dataclasses.is_dataclass(value):
            return {f.name: convert(getattr(value, f.name)) for f in dataclasses.fields(value)}
        if isinstance(value, (list, tuple)):
            return [convert(v) for v in value]
        return value

    return convert(obj)


def from_dict(cls, data, path: str = ""):
    """Build dataclass ``cls`` from nested dicts, rejecting unknown keys and bad types."""
    if not isinstance(data, dict):
        raise ConfigError(path or "<root>", "expected a mapping")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        key_path = f"{path}.{key}" if path else str(key)
        if key not in names:
            raise ConfigError(key_path, "unknown key")
        kwargs[key] = _coerce(hints[key], value, key_path)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(path or "<root>", str(exc)) from exc


def _coerce(hint, value, path):
    if dataclasses.is_dataclass(hint):
        return from_dict(hint, value, path)
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected a boolean, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    if hint in (list, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(path, f"expected a list, got {value!r}")
        return list(value)
    return value


def load_config(path) -> Config:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError("<root>", f"not valid YAML: {exc}") from exc
    return parse_config(data or {})


def parse_config(data: dict) -> Config:
    return from_dict(Config, data)


def dump_config(config: Config) -> str:
    return yaml.safe_dump(to_dict(config), sort_keys=False)


DEFAULT_CONFIG_TEXT = """\
# AASIST3 configuration document.  Unknown keys are rejected.
model:
  sample_rate: 16000
  input_seconds: 4.0        # fixed four-second model input
  hop_seconds: 2.0          # inference windows overlap by two seconds
  pre_emphasis: 0.97        # y[l] = x[l] - 0.97 x[l-1]
  n_filters: 70             # fixed sinc band-pass filters
  kernel_len: 129
  f_min: 200.0
  f_max: 8000.0
  sinc_stride: 1
  encoder:
    channels: [32, 32, 64, 64, 64, 64]   # six residual blocks
    kernel: [3, 3]
    input_pool: [1, 3]                   # max-pool before BatchNorm and SELU
    block_pools: [[1, 2], [1, 2], [1, 2], [1, 2], [1, 2], [1, 2]]
  graph_dim: 32
  pool_ratios: [0.5, 0.7, 0.5]          # temporal, spatial, in-branch
  temperature: 100.0                     # attention softmax temperature
  graph_dropout: 0.2                     # dropout in GAL, GraphPool and HS-GAL
  readout_dropout: [0.2, 0.5]            # on aggregated graphs, then on pooled vectors
  n_branches: 4                          # parallel HS-GAL branches
  stack_combine: max                     # max | sum across stages
  grid_range: [-1.0, 1.0]                # B-spline grid range
  grid_size: 16
  spline_order: 4                        # 2*4 + 16 + 1 = 25 knots
  seed: 0
train:
  lr: 1.0e-4
  beta1: 0.9
  beta2: 0.999
  eps: 1.0e-8
  batch_size: 8
  epochs: 10
  class_weights: [1.0, 1.0]              # spoof, bonafide
  seed: 0
  checkpoint_every: 1
metrics:
  p_target: 0.05
  c_miss: 1.0
  c_fa: 10.0
"""

POCKET_CONFIG_TEXT = """\
# Tiny configuration for gradient checks and toy-data training.
model:
  n_filters: 8
  kernel_len: 17
  sinc_stride: 8
  encoder:
    channels: [8, 8]
    kernel: [3, 3]
    input_pool: [1, 5]
    block_pools: [[1, 7], [1, 7]]
  graph_dim: 8
  n_branches: 2
  graph_dropout: 0.0          # full-scale rates swamp an 8-wide graph
  readout_dropout: [0.0, 0.1]
  seed: 7
train:
  lr: 1.0e-3
  batch_size: 8
  epochs: 15
  seed: 7
"""
