"""Dense tensors, reverse-mode differentiation and layer primitives."""

from .gradcheck import grad_check, numerical_gradient
from .init import kaiming_init, xavier_init
from .module import BatchNorm, Module
from .ops import (
    BatchNormState,
    batch_norm,
    conv2d,
    dropout,
    log_softmax,
    max_pool2d,
    prelu,
    relu,
    selu,
    softmax_t,
)
from .tensor import (
    DEFAULT_DTYPE,
    Tensor,
    check_finite,
    concat,
    ensure_tensor,
    is_grad_enabled,
    no_grad,
    parameter,
    stack,
    take_along_axis,
    where,
)

__all__ = [
    "DEFAULT_DTYPE",
    "BatchNorm",
    "BatchNormState",
    "Module",
    "Tensor",
    "batch_norm",
    "check_finite",
    "concat",
    "conv2d",
    "dropout",
    "ensure_tensor",
    "grad_check",
    "is_grad_enabled",
    "kaiming_init",
    "log_softmax",
    "max_pool2d",
    "no_grad",
    "numerical_gradient",
    "parameter",
    "prelu",
    "relu",
    "selu",
    "softmax_t",
    "stack",
    "take_along_axis",
    "where",
    "xavier_init",
]
