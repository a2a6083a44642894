"""Layer primitives with hand-written backward passes."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import NonFiniteError
from .tensor import Tensor, _unbroadcast, ensure_tensor

SELU_ALPHA = 1.6732632423543772
SELU_SCALE = 1.0507009873554805
BN_EPS = 1e-5
BN_MOMENTUM = 0.1


def softmax_t(x: Tensor, axis: int = -1, temperature: float = 1.0) -> Tensor:
    """softmax(x / temperature) along ``axis`` with max subtraction."""
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    x = ensure_tensor(x)
    if not np.all(np.isfinite(x.data)):
        raise NonFiniteError("softmax input is not finite")
    z = x.data / temperature
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - inner) / temperature,)

    return Tensor._make(out, (x,), backward)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    x = ensure_tensor(x)
    z = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
    out = z - lse
    soft = np.exp(out)

    def backward(g):
        return (g - soft * g.sum(axis=axis, keepdims=True),)

    return Tensor._make(out, (x,), backward)


def selu(x: Tensor) -> Tensor:
    x = ensure_tensor(x)
    pos = x.data > 0
    neg_part = SELU_SCALE * SELU_ALPHA * np.exp(np.minimum(x.data, 0.0))
    out = np.where(pos, SELU_SCALE * x.data, neg_part - SELU_SCALE * SELU_ALPHA)

    def backward(g):
        return (g * np.where(pos, SELU_SCALE, neg_part),)

    return Tensor._make(out, (x,), backward)


def prelu(x: Tensor, slope: Tensor) -> Tensor:
    """max(0, x) + slope * min(0, x); ``slope`` broadcasts against the trailing axes."""
    x, slope = ensure_tensor(x), ensure_tensor(slope)
    neg = np.minimum(x.data, 0.0)
    out = np.maximum(x.data, 0.0) + slope.data * neg

    def backward(g):
        gx = g * np.where(x.data > 0, 1.0, slope.data) if x.requires_grad else None
        gs = _unbroadcast(g * neg, slope.shape) if slope.requires_grad else None
        return gx, gs

    return Tensor._make(out, (x, slope), backward)


def relu(x: Tensor) -> Tensor:
    x = ensure_tensor(x)
    mask = x.data > 0
    return Tensor._make(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


class BatchNormState:
    """Running statistics for :func:`batch_norm` (momentum 0.1, eps 1e-5)."""

    def __init__(self, num_features: int, dtype=np.float64):
        self.running_mean = np.zeros(num_features, dtype=dtype)
        self.running_var = np.ones(num_features, dtype=dtype)


def batch_norm(
    x: Tensor,
    scale: Tensor,
    shift: Tensor,
    state: BatchNormState,
    training: bool,
    axis: int = -1,
    momentum: float = BN_MOMENTUM,
    eps: float = BN_EPS,
) -> Tensor:
    """Normalise each feature along ``axis`` using statistics over all other axes."""
    x = ensure_tensor(x)
    axis = axis % x.ndim
    reduce_axes = tuple(i for i in range(x.ndim) if i != axis)
    n = int(np.prod([x.shape[i] for i in reduce_axes])) if reduce_axes else 1
    if x.data.size == 0 or n == 0:
        raise ValueError("batch_norm on an empty batch")
    bshape = [1] * x.ndim
    bshape[axis] = x.shape[axis]

    if training:
        mean = x.data.mean(axis=reduce_axes)
        var = x.data.var(axis=reduce_axes)
        unbiased = var * n / (n - 1) if n > 1 else var
        state.running_mean *= 1.0 - momentum
        state.running_mean += momentum * mean
        state.running_var *= 1.0 - momentum
        state.running_var += momentum * unbiased
    else:
        mean = state.running_mean
        var = state.running_var
    inv_std = (1.0 / np.sqrt(var + eps)).reshape(bshape)
    xhat = (x.data - mean.reshape(bshape)) * inv_std
    out = xhat * scale.data.reshape(bshape) + shift.data.reshape(bshape)

    def backward(g):
        gscale = (g * xhat).sum(axis=reduce_axes) if scale.requires_grad else None
        gshift = g.sum(axis=reduce_axes) if shift.requires_grad else None
        gx = None
        if x.requires_grad:
            dxhat = g * scale.data.reshape(bshape)
            if training:
                s1 = dxhat.sum(axis=reduce_axes, keepdims=True)
                s2 = (dxhat * xhat).sum(axis=reduce_axes, keepdims=True)
                gx = inv_std * (dxhat - s1 / n - xhat * s2 / n)
            else:
                gx = dxhat * inv_std
        return gx, gscale, gshift

    return Tensor._make(out, (x, scale, shift), backward)


def dropout(x: Tensor, p: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: survivors are scaled by 1/(1-p) at train time."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must lie in [0, 1), got {p}")
    x = ensure_tensor(x)
    if not training or p == 0.0:
        return x
    if rng is None:
        raise ValueError("training-mode dropout needs an explicit rng")
    mask = (rng.random(x.shape) >= p).astype(x.dtype) / (1.0 - p)
    return Tensor._make(x.data * mask, (x,), lambda g: (g * mask,))


def _windows(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    return sliding_window_view(x, (kh, kw), axis=(2, 3))


def conv2d(x: Tensor, weight: Tensor, bias: Tensor | None = None, padding=(0, 0)) -> Tensor:
    """Stride-1 2-D cross-correlation on (B, C, H, W) with zero padding."""
    x, weight = ensure_tensor(x), ensure_tensor(weight)
    if x.ndim != 4 or weight.ndim != 4:
        raise ValueError("conv2d expects (B, C, H, W) input and (O, C, kh, kw) weight")
    if x.shape[1] != weight.shape[1]:
        raise ValueError(f"conv2d channel mismatch: input {x.shape[1]}, weight {weight.shape[1]}")
    ph, pw = padding
    _, _, kh, kw = weight.shape
    xp = np.pad(x.data, ((0, 0), (0, 0), (ph, ph), (pw, pw))) if (ph or pw) else x.data
    win = _windows(xp, kh, kw)  # B, C, Ho, Wo, kh, kw
    out = np.tensordot(win, weight.data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    parents = [x, weight]
    if bias is not None:
        bias = ensure_tensor(bias)
        out = out + bias.data.reshape(1, -1, 1, 1)
        parents.append(bias)
    out = np.ascontiguousarray(out)

    def backward(g):
        gw = gx = gb = None
        if weight.requires_grad:
            gw = np.tensordot(g, win, axes=([0, 2, 3], [0, 2, 3]))
        if x.requires_grad:
            gp = np.pad(g, ((0, 0), (0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1)))
            gwin = _windows(gp, kh, kw)  # B, O, H+2ph, W+2pw, kh, kw
            flipped = weight.data[:, :, ::-1, ::-1]
            full = np.tensordot(gwin, flipped, axes=([1, 4, 5], [0, 2, 3])).transpose(0, 3, 1, 2)
            gx = full[:, :, ph : ph + x.shape[2], pw : pw + x.shape[3]]
        if bias is not None and bias.requires_grad:
            gb = g.sum(axis=(0, 2, 3))
        grads = [gx, gw]
        if bias is not None:
            grads.append(gb)
        return tuple(grads)

    return Tensor._make(out, parents, backward)


def max_pool2d(x: Tensor, kernel) -> Tensor:
    """Non-overlapping max pooling on (B, C, H, W); trailing remainders are dropped."""
    x = ensure_tensor(x)
    kh, kw = kernel
    b, c, h, w = x.shape
    ho, wo = h // kh, w // kw
    if ho == 0 or wo == 0:
        raise ValueError(f"max_pool2d window {kernel} larger than input {(h, w)}")
    cropped = x.data[:, :, : ho * kh, : wo * kw]
    blocks = cropped.reshape(b, c, ho, kh, wo, kw).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, ho, wo, kh * kw)
    arg = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]

    def backward(g):
        gblocks = np.zeros_like(blocks)
        np.put_along_axis(gblocks, arg[..., None], g[..., None], axis=-1)
        gcrop = gblocks.reshape(b, c, ho, wo, kh, kw).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, ho * kh, wo * kw)
        full = np.zeros_like(x.data)
        full[:, :, : ho * kh, : wo * kw] = gcrop
        return (full,)

    return Tensor._make(out, (x,), backward)
