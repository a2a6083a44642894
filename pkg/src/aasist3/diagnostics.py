"""Finite-difference gradient suite over every differentiable building block."""

from __future__ import annotations

import dataclasses
from typing import Callable, NamedTuple

import numpy as np

from .config import ModelConfig, pocket_model_config
from .encoder import ConvUnit, Encoder, EncoderConfig, ResidualBlock
from .graph import HeteroState, KanGal, KanGraphPool, KanHsGal
from .kan import KanLayer
from .model import Aasist3Model, readout
from .numerics import Tensor, grad_check
from .train import cross_entropy

LAYER_TOL = 1e-4
MODEL_TOL = 1e-3


class GradResult(NamedTuple):
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


def _projected(out: Tensor, seed: int) -> Tensor:
    # random linear functional so every output coordinate contributes
    weights = np.random.default_rng(seed).normal(size=out.shape)
    return (out * Tensor(weights)).sum()


def _tensor(rng, *shape, scale=1.0) -> Tensor:
    return Tensor(rng.normal(scale=scale, size=shape), requires_grad=True)


def check_kan(rng) -> float:
    layer = KanLayer(3, 2, rng)
    x = _tensor(rng, 5, 3, scale=0.6)
    return grad_check(lambda x, *p: _projected(layer(x), 1), x, *layer.parameters())


def check_gal(rng) -> float:
    gal = KanGal(3, 3, rng, temperature=1.0)
    h = _tensor(rng, 2, 4, 3, scale=0.6)
    f = lambda h, *p: _projected(gal(h, True, np.random.default_rng(5)), 2)
    return grad_check(f, h, *gal.parameters())


def check_pool(rng) -> float:
    pool = KanGraphPool(3, 0.5, rng)
    h = _tensor(rng, 2, 6, 3, scale=0.6)
    f = lambda h, *p: _projected(pool(h, True, np.random.default_rng(5)), 3)
    return grad_check(f, h, *pool.parameters())


def check_hs_gal(rng) -> float:
    layer = KanHsGal(3, 3, 3, rng, temperature=1.0)
    h_t, h_s, s = _tensor(rng, 2, 3, 3, scale=0.6), _tensor(rng, 2, 2, 3, scale=0.6), _tensor(rng, 2, 3, scale=0.6)

    def f(h_t, h_s, s, *params):
        out = layer(HeteroState(h_t, h_s, s), True, np.random.default_rng(5))
        return _projected(out.h_t, 4) + _projected(out.h_s, 5) + _projected(out.stack, 6)

    return grad_check(f, h_t, h_s, s, *layer.parameters())


def check_conv_unit(rng) -> float:
    unit = ConvUnit(1, 2, (3, 3), rng)
    x = _tensor(rng, 1, 1, 4, 4)
    return grad_check(lambda x, *p: _projected(unit(x, True), 7), x, *unit.parameters())


def check_residual_block(rng) -> float:
    block = ResidualBlock(2, 3, (3, 3), (1, 2), rng)
    x = _tensor(rng, 2, 2, 4, 4)
    return grad_check(lambda x, *p: _projected(block(x, True), 8), x, *block.parameters())


def check_encoder(rng) -> float:
    enc = Encoder(EncoderConfig(channels=[2, 3], input_pool=(1, 2), block_pools=[(1, 2), (2, 2)]), rng)
    x = _tensor(rng, 1, 1, 8, 32)
    return grad_check(lambda x, *p: _projected(enc(x, True), 9), x, *enc.parameters(), max_coords=40)


def check_readout(rng) -> float:
    layer = KanLayer(15, 2, rng)
    h_t, h_s, s = _tensor(rng, 2, 4, 3, scale=0.6), _tensor(rng, 2, 3, 3, scale=0.6), _tensor(rng, 2, 3, scale=0.6)
    f = lambda h_t, h_s, s, *p: _projected(readout(h_t, h_s, s, layer, True, np.random.default_rng(5)), 10)
    return grad_check(f, h_t, h_s, s, *layer.parameters())


def check_cross_entropy(rng) -> float:
    logits = _tensor(rng, 4, 2)
    labels = np.array([0, 1, 1, 0])
    return grad_check(lambda z: cross_entropy(z, labels, [0.7, 1.3]), logits)


def gradcheck_model_config(base: ModelConfig | None = None) -> ModelConfig:
    """The pocket configuration shortened to a quarter-second input so the whole model differences quickly."""
    base = base if base is not None else pocket_model_config()
    return dataclasses.replace(base, input_seconds=0.25, hop_seconds=0.125)


def check_model(rng, config: ModelConfig | None = None, max_coords: int = 3) -> float:
    model = Aasist3Model(gradcheck_model_config(config))
    # the zero-initialised stack node and embeddings sit on the PReLU kink; move to a generic point
    for p in (model.stack_node, model.pe_t, model.pe_s):
        p.data = rng.normal(scale=0.3, size=p.shape)
    x = rng.normal(scale=0.1, size=(3, model.config.input_samples))
    labels = np.array([1, 0, 1])

    def f(*params):
        return cross_entropy(model(x, True, np.random.default_rng(5)), labels)

    return grad_check(f, *model.parameters(), max_coords=max_coords, rng=rng)


CHECKS: dict[str, tuple[Callable, float]] = {
    "kan": (check_kan, LAYER_TOL),
    "gal": (check_gal, LAYER_TOL),
    "pool": (check_pool, LAYER_TOL),
    "hs_gal": (check_hs_gal, LAYER_TOL),
    "conv_unit": (check_conv_unit, LAYER_TOL),
    "residual_block": (check_residual_block, LAYER_TOL),
    "encoder": (check_encoder, LAYER_TOL),
    "readout": (check_readout, LAYER_TOL),
    "cross_entropy": (check_cross_entropy, LAYER_TOL),
    "model": (check_model, MODEL_TOL),
}


def run_gradcheck_suite(modules=None, seed: int = 0, config: ModelConfig | None = None) -> list[GradResult]:
    names = list(CHECKS) if not modules else list(modules)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown gradcheck modules {unknown}; choose from {list(CHECKS)}")
    results = []
    for name in names:
        fn, tol = CHECKS[name]
        rng = np.random.default_rng([seed, list(CHECKS).index(name)])
        error = fn(rng, config) if name == "model" else fn(rng)
        results.append(GradResult(name, float(error), tol))
    return results
