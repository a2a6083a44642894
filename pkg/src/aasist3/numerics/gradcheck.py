"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import NonFiniteError
from .tensor import Tensor, no_grad


def numerical_gradient(f: Callable[..., Tensor], tensors, target: Tensor, eps: float = 1e-5, coords=None):
    """Central differences of scalar ``f(*tensors)`` w.r.t. ``target`` at ``coords``."""
    target.data = np.ascontiguousarray(target.data)
    flat = target.data.reshape(-1)
    if coords is None:
        coords = range(flat.size)
    grads = {}
    with no_grad():
        for i in coords:
            orig = flat[i]
            flat[i] = orig + eps
            fp = _scalar(f(*tensors))
            flat[i] = orig - eps
            fm = _scalar(f(*tensors))
            flat[i] = orig
            grads[int(i)] = (fp - fm) / (2.0 * eps)
    return grads


def _scalar(value) -> float:
    v = float(value.data.reshape(()) if isinstance(value, Tensor) else value)
    if not np.isfinite(v):
        raise NonFiniteError("non-finite value during finite differencing")
    return v


def grad_check(
    f: Callable[..., Tensor],
    *tensors: Tensor,
    eps: float = 1e-5,
    max_coords: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative error between backprop and central differences.

    ``f`` is called as ``f(*tensors)`` and must return a scalar tensor; it must
    be deterministic (re-seed any dropout inside it).  The error per coordinate
    is ``|analytic - numeric| / max(1, |analytic|, |numeric|)``.  With
    ``max_coords`` only that many randomly chosen coordinates per tensor are
    differenced.
    """
    for t in tensors:
        if t.data.dtype != np.float64:
            raise TypeError("grad_check needs float64 tensors")
        t.requires_grad = True
        t.grad = None
    out = f(*tensors)
    if not isinstance(out, Tensor) or out.data.size != 1:
        raise ValueError("f must return a scalar Tensor")
    _scalar(out)
    if out.requires_grad:
        out.backward()
    rng = rng if rng is not None else np.random.default_rng(0)
    worst = 0.0
    for t in tensors:
        analytic = t.grad.reshape(-1) if t.grad is not None else np.zeros(t.size)
        if not np.all(np.isfinite(analytic)):
            raise NonFiniteError("non-finite analytic gradient")
        coords = None
        if max_coords is not None and t.size > max_coords:
            coords = np.sort(rng.choice(t.size, size=max_coords, replace=False))
        numeric = numerical_gradient(f, tensors, t, eps, coords)
        for i, n in numeric.items():
            a = analytic[i]
            err = abs(a - n) / max(1.0, abs(a), abs(n))
            worst = max(worst, err)
    return worst
