"""Residual convolutional encoder over the (1, F, T) filterbank feature map."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import BatchNorm, Module, Tensor, conv2d, ensure_tensor, kaiming_init, max_pool2d, parameter, selu


@dataclass
class EncoderConfig:
    channels: list = field(default_factory=lambda: [32, 32, 64, 64, 64, 64])
    kernel: tuple = (3, 3)
    input_pool: tuple = (1, 3)
    block_pools: list = field(default_factory=lambda: [(1, 2)] * 6)

    def __post_init__(self):
        self.kernel = tuple(int(k) for k in self.kernel)
        self.input_pool = tuple(int(k) for k in self.input_pool)
        self.block_pools = [tuple(int(k) for k in p) for p in self.block_pools]
        self.channels = [int(c) for c in self.channels]
        if len(self.channels) != len(self.block_pools) or not self.channels:
            raise ValueError("channels and block_pools must be non-empty lists of equal length")
        if any(k % 2 == 0 for k in self.kernel):
            raise ValueError("encoder kernel sizes must be odd")


def encoder_output_shape(n_filters: int, frames: int, config: EncoderConfig) -> tuple[int, int, int]:
    """(C, F', T') produced for a (1, n_filters, frames) input; raises if the pooling chain underflows."""
    f, t = n_filters, frames
    for ph, pw in [config.input_pool] + list(config.block_pools):
        f, t = f // ph, t // pw
        if f < 1 or t < 1:
            raise ValueError(
                f"input ({n_filters}, {frames}) too small for the pooling chain; "
                f"need at least {min_input_extent(config)} (filters, frames)"
            )
    return config.channels[-1], f, t


def min_input_extent(config: EncoderConfig) -> tuple[int, int]:
    f = t = 1
    for ph, pw in [config.input_pool] + list(config.block_pools):
        f, t = f * ph, t * pw
    return f, t


class Conv2d(Module):
    def __init__(self, c_in: int, c_out: int, kernel, rng: np.random.Generator):
        kh, kw = kernel
        self.padding = (kh // 2, kw // 2)
        self.weight = kaiming_init((c_out, c_in, kh, kw), c_in * kh * kw, rng)
        self.bias = parameter(np.zeros(c_out))

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.weight, self.bias, self.padding)


class ConvUnit(Module):
    """Conv(SELU(BatchNorm(x))) with same padding."""

    def __init__(self, c_in: int, c_out: int, kernel, rng: np.random.Generator):
        self.norm = BatchNorm(c_in, axis=1)
        self.conv = Conv2d(c_in, c_out, kernel, rng)

    def __call__(self, x: Tensor, training: bool = False) -> Tensor:
        x = ensure_tensor(x)
        if x.shape[1] != self.conv.weight.shape[1]:
            raise ValueError(f"conv unit expects {self.conv.weight.shape[1]} channels, got {x.shape[1]}")
        return self.conv(selu(self.norm(x, training)))


class ResidualBlock(Module):
    """Two convolution stages plus a skip path, followed by max pooling.

    The first block of the encoder starts with a plain convolution instead of
    a conv unit, so the single-channel input is never batch-normalised twice.
    """

    def __init__(self, c_in: int, c_out: int, kernel, pool, rng: np.random.Generator, first: bool = False):
        self.first = first
        self.pool = tuple(pool)
        self.conv1 = Conv2d(c_in, c_out, kernel, rng) if first else ConvUnit(c_in, c_out, kernel, rng)
        self.conv2 = ConvUnit(c_out, c_out, kernel, rng)
        self.skip = Conv2d(c_in, c_out, (1, 1), rng) if c_in != c_out else None

    def __call__(self, x: Tensor, training: bool = False) -> Tensor:
        x = ensure_tensor(x)
        out = self.conv1(x) if self.first else self.conv1(x, training)
        out = self.conv2(out, training)
        identity = self.skip(x) if self.skip is not None else x
        return max_pool2d(out + identity, self.pool)


class Encoder(Module):
    def __init__(self, config: EncoderConfig, rng: np.random.Generator):
        self.config = config
        self.input_norm = BatchNorm(1, axis=1)
        self.blocks = []
        c_in = 1
        for i, (c_out, pool) in enumerate(zip(config.channels, config.block_pools)):
            self.blocks.append(ResidualBlock(c_in, c_out, config.kernel, pool, rng, first=(i == 0)))
            c_in = c_out

    def output_shape(self, n_filters: int, frames: int) -> tuple[int, int, int]:
        return encoder_output_shape(n_filters, frames, self.config)

    def __call__(self, features: Tensor, training: bool = False) -> Tensor:
        """(B, 1, F, T) features -> (B, C, F', T')."""
        features = ensure_tensor(features)
        if features.ndim == 3:
            features = features.expand_dims(1)
        self.output_shape(features.shape[2], features.shape[3])
        x = max_pool2d(features, self.config.input_pool)
        x = selu(self.input_norm(x, training))
        for block in self.blocks:
            x = block(x, training)
        return x
