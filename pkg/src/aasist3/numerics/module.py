"""A small container base class for layers that own parameters."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .ops import BatchNormState, batch_norm
from .tensor import Tensor, parameter


class Module:
    """Walks attributes in definition order to collect parameters and buffers.

    Parameters are :class:`Tensor` leaves with ``requires_grad``; buffers are
    :class:`BatchNormState` running statistics.  Lists of modules are walked
    with their index as the name component.
    """

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, value in vars(self).items():
            yield from _walk_params(value, prefix + name)

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def named_buffers(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
        for name, value in vars(self).items():
            yield from _walk_buffers(value, prefix + name)

    def state_dict(self) -> dict[str, np.ndarray]:
        state = {name: p.data for name, p in self.named_parameters()}
        state.update(self.named_buffers())
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for name, p in self.named_parameters():
            p.data = np.array(state[name], dtype=p.data.dtype).reshape(p.shape)
        for name, buf in self.named_buffers():
            buf[...] = state[name]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())


def _walk_params(value, name):
    if isinstance(value, Tensor):
        if value.requires_grad:
            yield name, value
    elif isinstance(value, Module):
        yield from value.named_parameters(name + ".")
    elif isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            yield from _walk_params(item, f"{name}.{i}")


def _walk_buffers(value, name):
    if isinstance(value, BatchNormState):
        yield f"{name}.running_mean", value.running_mean
        yield f"{name}.running_var", value.running_var
    elif isinstance(value, Module):
        yield from value.named_buffers(name + ".")
    elif isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            yield from _walk_buffers(item, f"{name}.{i}")


class BatchNorm(Module):
    """Affine batch normalisation over one feature axis."""

    def __init__(self, num_features: int, axis: int = -1):
        self.axis = axis
        self.scale = parameter(np.ones(num_features))
        self.shift = parameter(np.zeros(num_features))
        self.stats = BatchNormState(num_features)

    def __call__(self, x: Tensor, training: bool = False) -> Tensor:
        return batch_norm(x, self.scale, self.shift, self.stats, training, axis=self.axis)
