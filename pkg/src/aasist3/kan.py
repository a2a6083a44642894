"""Kolmogorov-Arnold layers with B-spline edge functions.

Each edge (q, p) of a layer carries phi(x) = w_b * prelu(x) + w_s * sum_i c_i B_i(x),
where B_i are degree-``order`` B-splines on a uniform knot vector extended
``order`` steps beyond the grid range on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import Module, Tensor, ensure_tensor, kaiming_init, parameter, prelu


@dataclass(frozen=True)
class SplineGrid:
    alpha1: float = -1.0
    alpha2: float = 1.0
    grid_size: int = 16
    order: int = 4
    knots: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.alpha2 > self.alpha1:
            raise ValueError(f"degenerate grid range [{self.alpha1}, {self.alpha2}]")
        if self.grid_size < 1 or self.order < 1:
            raise ValueError("grid_size and order must be at least 1")
        steps = np.arange(-self.order, self.grid_size + self.order + 1)
        knots = self.alpha1 + steps * self.h
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)

    @property
    def h(self) -> float:
        return (self.alpha2 - self.alpha1) / self.grid_size

    @property
    def n_knots(self) -> int:
        return 2 * self.order + self.grid_size + 1

    @property
    def n_basis(self) -> int:
        return self.grid_size + self.order


def build_grid(alpha1: float = -1.0, alpha2: float = 1.0, grid_size: int = 16, order: int = 4) -> SplineGrid:
    return SplineGrid(alpha1, alpha2, grid_size, order)


def cox_de_boor(x: np.ndarray, knots: np.ndarray, degree: int) -> list[np.ndarray]:
    """All recursion levels 0..degree; level k has shape x.shape + (len(knots) - 1 - k,)."""
    x = np.asarray(x, dtype=np.float64)[..., None]
    t = knots
    b = ((x >= t[:-1]) & (x < t[1:])).astype(np.float64)
    levels = [b]
    for k in range(1, degree + 1):
        left = (x - t[: -k - 1]) / (t[k:-1] - t[: -k - 1])
        right = (t[k + 1 :] - x) / (t[k + 1 :] - t[1:-k])
        b = left * b[..., :-1] + right * b[..., 1:]
        levels.append(b)
    return levels


class BSplineBasis:
    """Univariate basis interface: ``evaluate(x)`` returns values and derivatives."""

    def __init__(self, grid: SplineGrid):
        self.grid = grid

    @property
    def n_basis(self) -> int:
        return self.grid.n_basis

    def values(self, x) -> np.ndarray:
        return self.evaluate(x)[0]

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Values and d/dx of every basis function at ``x`` (shape x.shape + (n_basis,)).

        Uses the knot uniformity: only the ``order + 1`` functions that are
        nonzero on the knot interval containing x are computed, by the same
        recursion restricted to that interval, then scattered into place.
        """
        grid = self.grid
        d, h, k = grid.order, grid.h, grid.n_basis
        x = np.asarray(x, dtype=np.float64)
        flat = x.reshape(-1)
        m = flat.size
        pos = (flat - grid.knots[0]) / h
        inside = (flat >= grid.knots[0]) & (flat < grid.knots[-1])
        j = np.clip(np.where(inside, np.floor(pos), 0), 0, grid.n_knots - 2).astype(np.intp)
        u = (pos - j)[:, None]
        # at level L, column r holds B_{j-L+r, L}(x)
        local = np.ones((m, 1))
        lower = local
        for level in range(1, d + 1):
            prev = np.zeros((m, level + 2))
            prev[:, 1:-1] = local
            r = np.arange(level + 1)
            lower = prev
            local = ((u + level - r) * prev[:, :-1] + (r + 1 - u) * prev[:, 1:]) / level
        dlocal = (lower[:, :-1] - lower[:, 1:]) / h
        values = np.zeros((m, k))
        deriv = np.zeros((m, k))
        for r in range(d + 1):
            idx = j - d + r
            rows = np.nonzero(inside & (idx >= 0) & (idx < k))[0]
            values[rows, idx[rows]] = local[rows, r]
            deriv[rows, idx[rows]] = dlocal[rows, r]
        shape = x.shape + (k,)
        return values.reshape(shape), deriv.reshape(shape)


def bspline_basis(x, grid: SplineGrid) -> np.ndarray:
    return BSplineBasis(grid).values(x)


def basis_transform(x: Tensor, basis: BSplineBasis) -> Tensor:
    """Differentiable map x[...] -> basis values [..., n_basis]."""
    x = ensure_tensor(x)
    values, deriv = basis.evaluate(x.data)
    return Tensor._make(values, (x,), lambda g: ((g * deriv).sum(axis=-1),))


class KanLayer(Module):
    """Matrix of learnable univariate functions mapping n_in features to n_out."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, grid: SplineGrid | None = None,
                 coeff_std: float = 0.1, slope_init: float = 0.25):
        self.n_in = n_in
        self.n_out = n_out
        self.grid = grid if grid is not None else SplineGrid()
        self.basis = BSplineBasis(self.grid)
        self.coeffs = parameter(rng.normal(0.0, coeff_std, size=(n_out, n_in, self.grid.n_basis)))
        self.w_b = kaiming_init((n_out, n_in), n_in, rng)
        self.w_s = kaiming_init((n_out, n_in), n_in, rng)
        self.slope = parameter(np.full(n_in, slope_init))

    def __call__(self, x: Tensor) -> Tensor:
        return kan_forward(self, x)

    def phi(self, x: float, q: int, p: int) -> float:
        """Evaluate the single edge function from input p to output q."""
        return phi_edge(x, self.w_b.data[q, p], self.w_s.data[q, p], self.coeffs.data[q, p], self.slope.data[p], self.grid)


def phi_edge(x, w_b: float, w_s: float, coeffs: np.ndarray, slope: float, grid: SplineGrid):
    x = np.asarray(x, dtype=np.float64)
    base = np.maximum(x, 0.0) + slope * np.minimum(x, 0.0)
    spline = bspline_basis(x, grid) @ np.asarray(coeffs)
    return w_b * base + w_s * spline


def kan_forward(layer: KanLayer, x: Tensor) -> Tensor:
    """out[..., q] = sum_p phi_{q,p}(x[..., p])."""
    x = ensure_tensor(x)
    if x.shape[-1] != layer.n_in:
        raise ValueError(f"KAN layer expects {layer.n_in} input features, got {x.shape[-1]}")
    lead = x.shape[:-1]
    flat = x.reshape(-1, layer.n_in)
    base = prelu(flat, layer.slope) @ layer.w_b.transpose()
    k = layer.basis.n_basis
    values = basis_transform(flat, layer.basis).reshape(-1, layer.n_in * k)
    weights = (layer.w_s.reshape(layer.n_out, layer.n_in, 1) * layer.coeffs).reshape(layer.n_out, layer.n_in * k)
    out = base + values @ weights.transpose()
    return out.reshape(lead + (layer.n_out,))
