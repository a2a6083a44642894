"""Graph attention, graph pooling and heterogeneous stacking attention with KAN projections.

Graphs are (B, N, D) tensors of N fully connected nodes.  Attention maps are
normalised over the second node index, so ``A @ h`` forms a convex
combination of node features for every target node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kan import KanLayer, SplineGrid
from .numerics import (
    BatchNorm,
    Module,
    Tensor,
    concat,
    dropout,
    ensure_tensor,
    softmax_t,
    take_along_axis,
    xavier_init,
)

W11, W12, W22 = 0, 1, 2


def pairwise_products(h: Tensor) -> Tensor:
    """(B, N, D) -> (B, N, N, D) with entry [b, i, j] = h[b, i] * h[b, j]."""
    return h.expand_dims(2) * h.expand_dims(1)


class KanGal(Module):
    """Graph attention layer whose projections are KAN layers."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, temperature: float = 100.0,
                 p_dropout: float = 0.2, grid: SplineGrid | None = None):
        self.temperature = temperature
        self.p_dropout = p_dropout
        self.att_proj = KanLayer(in_dim, out_dim, rng, grid)
        self.att_weight = xavier_init((out_dim, 1), out_dim, 1, rng)
        self.proj_with_att = KanLayer(in_dim, out_dim, rng, grid)
        self.proj_without_att = KanLayer(in_dim, out_dim, rng, grid)
        self.norm = BatchNorm(out_dim)

    def attention(self, h: Tensor) -> Tensor:
        logits = (self.att_proj(pairwise_products(h)).tanh() @ self.att_weight)
        return softmax_t(logits.reshape(logits.shape[:-1]), axis=-1, temperature=self.temperature)

    def __call__(self, h: Tensor, training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        h = dropout(ensure_tensor(h), self.p_dropout, training, rng)
        att = self.attention(h)
        out = self.proj_with_att(att @ h) + self.proj_without_att(h)
        return self.norm(out, training)


def pool_size(n: int, ratio: float) -> int:
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"pooling ratio must lie in (0, 1], got {ratio}")
    return max(1, math.ceil(round(ratio * n, 9)))


def top_k_indices(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest scores per row, ties to the lower index, in ascending order."""
    order = np.argsort(-scores, axis=-1, kind="stable")[..., :k]
    return np.sort(order, axis=-1)


class KanGraphPool(Module):
    """Keep the ceil(ratio * N) nodes with the highest sigmoid(KAN(h)) gate."""

    def __init__(self, in_dim: int, ratio: float, rng: np.random.Generator, p_dropout: float = 0.2,
                 grid: SplineGrid | None = None):
        pool_size(1, ratio)
        self.ratio = ratio
        self.p_dropout = p_dropout
        self.score = KanLayer(in_dim, 1, rng, grid)

    def __call__(self, h: Tensor, training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        h = dropout(ensure_tensor(h), self.p_dropout, training, rng)
        gate = self.score(h).sigmoid()  # B, N, 1
        gated = gate * h
        k = pool_size(h.shape[1], self.ratio)
        idx = top_k_indices(gate.data[..., 0], k)
        return take_along_axis(gated, idx[..., None], axis=1)


@dataclass
class HeteroState:
    """Temporal graph, spatial graph and stack node of one heterogeneous stage."""

    h_t: Tensor
    h_s: Tensor
    stack: Tensor

    @property
    def counts(self) -> tuple[int, int]:
        return self.h_t.shape[1], self.h_s.shape[1]


def block_assignment(n_t: int, n_s: int, rule: str = "partition") -> np.ndarray:
    """Which of W11 / W12 / W22 scores each node pair of the merged graph.

    ``"partition"``: temporal-temporal pairs use W11, spatial-spatial pairs
    W22 and mixed pairs W12.  ``"literal"``: 1-based cases tested in order,
    i <= n_t and j <= n_t -> W11, i >= n_t and j >= n_t -> W22, else W12,
    which also sends pairs of the last temporal node with spatial nodes to
    W22.  Only the partition keeps the layer equivariant to node order, so
    the layers use it.
    """
    idx = np.arange(1, n_t + n_s + 1)
    rows, cols = idx[:, None], idx[None, :]
    out = np.full((n_t + n_s, n_t + n_s), W12, dtype=np.intp)
    if rule == "partition":
        out[(rows > n_t) & (cols > n_t)] = W22
    elif rule == "literal":
        out[(rows >= n_t) & (cols >= n_t)] = W22
    else:
        raise ValueError(f"unknown block rule {rule!r}")
    out[(rows <= n_t) & (cols <= n_t)] = W11
    return out


def split_heterogeneous(h_st: Tensor, n_t: int, n_s: int) -> tuple[Tensor, Tensor]:
    """First n_t nodes form the temporal graph, the remaining n_s the spatial graph."""
    if h_st.shape[1] != n_t + n_s:
        raise ValueError(f"graph has {h_st.shape[1]} nodes, expected {n_t} + {n_s}")
    return h_st[:, :n_t], h_st[:, n_t:]


class KanHsGal(Module):
    """Heterogeneous stacking graph attention over a temporal graph, a spatial graph and a stack node."""

    def __init__(self, in_dim_t: int, in_dim_s: int, out_dim: int, rng: np.random.Generator,
                 proj_dim: int | None = None, temperature: float = 100.0, p_dropout: float = 0.2,
                 grid: SplineGrid | None = None):
        proj_dim = proj_dim or in_dim_t
        self.proj_dim = proj_dim
        self.out_dim = out_dim
        self.temperature = temperature
        self.p_dropout = p_dropout
        self.proj_t = KanLayer(in_dim_t, proj_dim, rng, grid)
        self.proj_s = KanLayer(in_dim_s, proj_dim, rng, grid)
        self.att_proj = KanLayer(proj_dim, out_dim, rng, grid)
        # columns: W11, W12, W22
        self.att_weights = [xavier_init((out_dim, 1), out_dim, 1, rng) for _ in range(3)]
        self.stack_att_proj = KanLayer(proj_dim, out_dim, rng, grid)
        self.stack_att_weight = xavier_init((out_dim, 1), out_dim, 1, rng)
        self.stack_with_att = KanLayer(proj_dim, out_dim, rng, grid)
        self.stack_without_att = KanLayer(proj_dim, out_dim, rng, grid)
        self.proj_with_att = KanLayer(proj_dim, out_dim, rng, grid)
        self.proj_without_att = KanLayer(proj_dim, out_dim, rng, grid)
        self.norm = BatchNorm(out_dim)

    def merge(self, state: HeteroState) -> Tensor:
        h_t, h_s = self.proj_t(state.h_t), self.proj_s(state.h_s)
        if h_t.shape[-1] != h_s.shape[-1]:
            raise ValueError("projected temporal and spatial node dimensions differ")
        return concat([h_t, h_s], axis=1)

    def primary_map(self, h_st: Tensor) -> Tensor:
        return self.att_proj(pairwise_products(h_st)).tanh()

    def secondary_map(self, primary: Tensor, n_t: int, n_s: int) -> Tensor:
        """Contract each pair's primary attention vector with its block weight, then softmax."""
        weights = concat(self.att_weights, axis=1)  # out_dim, 3
        scored = primary @ weights  # B, N, N, 3
        onehot = np.eye(3)[block_assignment(n_t, n_s)]
        logits = (scored * onehot).sum(axis=-1)
        return softmax_t(logits, axis=-1, temperature=self.temperature)

    def stack_attention(self, h_st: Tensor, stack: Tensor) -> Tensor:
        """Softmax over nodes of tanh(KAN(h_st * S)) W_m; returns (B, 1, N)."""
        logits = self.stack_att_proj(h_st * stack.expand_dims(1)).tanh() @ self.stack_att_weight
        return softmax_t(logits.swapaxes(1, 2), axis=-1, temperature=self.temperature)

    def __call__(self, state: HeteroState, training: bool = False, rng: np.random.Generator | None = None) -> HeteroState:
        n_t, n_s = state.counts
        stack = ensure_tensor(state.stack)
        if stack.shape[-1] != self.proj_dim:
            raise ValueError(f"stack node has dim {stack.shape[-1]}, expected {self.proj_dim}")
        h_st = dropout(self.merge(state), self.p_dropout, training, rng)
        att = self.secondary_map(self.primary_map(h_st), n_t, n_s)
        att_m = self.stack_attention(h_st, stack)
        new_stack = self.stack_with_att(att_m @ h_st).reshape(stack.shape[0], self.out_dim) + self.stack_without_att(stack)
        out = self.norm(self.proj_with_att(att @ h_st) + self.proj_without_att(h_st), training)
        h_t, h_s = split_heterogeneous(out, n_t, n_s)
        return HeteroState(h_t, h_s, new_stack)
