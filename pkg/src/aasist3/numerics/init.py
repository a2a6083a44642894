"""Seeded parameter initialisers."""

from __future__ import annotations

import math

import numpy as np

from .tensor import Tensor, parameter


def _check_shape(shape) -> tuple:
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    if any(int(s) <= 0 for s in shape):
        raise ValueError(f"invalid shape {shape}")
    return tuple(int(s) for s in shape)


def kaiming_init(shape, fan_in: int, rng: np.random.Generator) -> Tensor:
    """Normal draws with standard deviation sqrt(2 / fan_in)."""
    shape = _check_shape(shape)
    if fan_in <= 0:
        raise ValueError("fan_in must be positive")
    return parameter(rng.normal(0.0, math.sqrt(2.0 / fan_in), size=shape))


def xavier_init(shape, fan_in: int, fan_out: int, rng: np.random.Generator) -> Tensor:
    """Uniform draws on [-b, b] with b = sqrt(6 / (fan_in + fan_out))."""
    shape = _check_shape(shape)
    if fan_in <= 0 or fan_out <= 0:
        raise ValueError("fan_in and fan_out must be positive")
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return parameter(rng.uniform(-bound, bound, size=shape))
