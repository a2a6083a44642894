"""AASIST3 assembly: graphs from encoder features, parallel HS-GAL branches, readout and scoring."""

from __future__ import annotations

import numpy as np

from .config import ModelConfig
from .dsp import AudioSignal, SincFilterbank, chunk_signal, conv_frames, pre_emphasis, sinc_conv
from .encoder import Encoder
from .graph import HeteroState, KanGal, KanGraphPool, KanHsGal
from .kan import KanLayer, SplineGrid
from .numerics import Module, Tensor, concat, dropout, ensure_tensor, no_grad, parameter, softmax_t, stack

BONAFIDE, SPOOF = 1, 0


def graphs_from_features(x_hat: Tensor, pe_t: Tensor, pe_s: Tensor) -> tuple[Tensor, Tensor]:
    """(B, C, F', T') -> temporal (B, T', C) and spatial (B, F', C) node sets with positional embeddings."""
    x_hat = ensure_tensor(x_hat)
    mag = x_hat.abs()
    temporal = mag.max(axis=2).swapaxes(1, 2)
    spatial = mag.max(axis=3).swapaxes(1, 2)
    if pe_t.shape != temporal.shape[1:] or pe_s.shape != spatial.shape[1:]:
        raise ValueError(
            f"positional embeddings {pe_t.shape}, {pe_s.shape} do not match graphs "
            f"{temporal.shape[1:]}, {spatial.shape[1:]}"
        )
    return temporal + pe_t, spatial + pe_s


class Branch(Module):
    """HS-GAL, per-graph pooling, HS-GAL."""

    def __init__(self, dim: int, ratio: float, rng: np.random.Generator, temperature: float, p_dropout: float,
                 grid: SplineGrid):
        self.hs1 = KanHsGal(dim, dim, dim, rng, temperature=temperature, p_dropout=p_dropout, grid=grid)
        self.pool_t = KanGraphPool(dim, ratio, rng, p_dropout, grid)
        self.pool_s = KanGraphPool(dim, ratio, rng, p_dropout, grid)
        self.hs2 = KanHsGal(dim, dim, dim, rng, temperature=temperature, p_dropout=p_dropout, grid=grid)


def branch_forward(state: HeteroState, branch: Branch, training: bool = False,
                   rng: np.random.Generator | None = None) -> tuple[HeteroState, HeteroState]:
    stage2 = branch.hs1(state, training, rng)
    pooled = HeteroState(branch.pool_t(stage2.h_t, training, rng), branch.pool_s(stage2.h_s, training, rng), stage2.stack)
    stage3 = branch.hs2(pooled, training, rng)
    return stage2, stage3


def _branch_max(tensors: list[Tensor]) -> Tensor:
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise ValueError(f"branch outputs disagree in shape: {sorted(shapes)}")
    return tensors[0] if len(tensors) == 1 else stack(tensors, axis=0).max(axis=0)


def aggregate_branches(pre: HeteroState, outputs: list[tuple[HeteroState, HeteroState]],
                       stack_combine: str = "max") -> tuple[Tensor, Tensor, Tensor]:
    """Cross-branch max per stage, node-axis concatenation across stages, combined stack node."""
    if not outputs:
        raise ValueError("no branch outputs to aggregate")
    stages = []
    for k in range(2):
        stages.append(HeteroState(
            _branch_max([o[k].h_t for o in outputs]),
            _branch_max([o[k].h_s for o in outputs]),
            _branch_max([o[k].stack for o in outputs]),
        ))
    h_t = concat([pre.h_t] + [s.h_t for s in stages], axis=1)
    h_s = concat([pre.h_s] + [s.h_s for s in stages], axis=1)
    stacks = [pre.stack] + [s.stack for s in stages]
    if stack_combine == "max":
        s_f = stack(stacks, axis=0).max(axis=0)
    elif stack_combine == "sum":
        s_f = stacks[0] + stacks[1] + stacks[2]
    else:
        raise ValueError(f"unknown stack_combine {stack_combine!r}")
    return h_t, h_s, s_f


def readout(h_t: Tensor, h_s: Tensor, s_f: Tensor, layer: KanLayer, training: bool = False,
            rng: np.random.Generator | None = None, p_graph: float = 0.2, p_hidden: float = 0.5) -> Tensor:
    """Node-wise max and mean of both graphs plus the stack node, through a KAN layer to 2 logits."""
    h_t = dropout(h_t, p_graph, training, rng)
    h_s = dropout(h_s, p_graph, training, rng)
    s_f = dropout(s_f, p_graph, training, rng)
    parts = [h_t.max(axis=1), h_t.mean(axis=1), h_s.max(axis=1), h_s.mean(axis=1), s_f]
    hidden = concat([dropout(p, p_hidden, training, rng) for p in parts], axis=-1)
    return layer(hidden)


class Aasist3Model(Module):
    def __init__(self, config: ModelConfig | None = None):
        config = config if config is not None else ModelConfig()
        self.config = config
        rng = np.random.default_rng(config.seed)
        grid = SplineGrid(config.grid_range[0], config.grid_range[1], config.grid_size, config.spline_order)
        self.filterbank = SincFilterbank(config.n_filters, config.kernel_len, config.f_min, config.f_max,
                                         config.sample_rate)
        self.encoder = Encoder(config.encoder, rng)
        c, f_out, t_out = self.feature_shape
        d = config.graph_dim
        r_t, r_s, r_b = config.pool_ratios
        p, temp = config.graph_dropout, config.temperature
        self.pe_t = parameter(np.zeros((t_out, c)))
        self.pe_s = parameter(np.zeros((f_out, c)))
        self.gal_t = KanGal(c, d, rng, temp, p, grid)
        self.gal_s = KanGal(c, d, rng, temp, p, grid)
        self.pool_t = KanGraphPool(d, r_t, rng, p, grid)
        self.pool_s = KanGraphPool(d, r_s, rng, p, grid)
        self.stack_node = parameter(np.zeros(d))
        self.branches = [Branch(d, r_b, rng, temp, p, grid) for _ in range(config.n_branches)]
        self.output = KanLayer(5 * d, 2, rng, grid)

    @property
    def feature_shape(self) -> tuple[int, int, int]:
        frames = conv_frames(self.config.input_samples, self.config.kernel_len, self.config.sinc_stride)
        return self.encoder.output_shape(self.config.n_filters, frames)

    def features(self, chunks) -> Tensor:
        """Pre-emphasised (B, L) chunks -> fixed filterbank map (B, 1, F, T)."""
        x = np.asarray(chunks, dtype=np.float64)
        if x.ndim == 1:
            x = x[None]
        if x.shape[-1] != self.config.input_samples:
            raise ValueError(f"model input must be {self.config.input_samples} samples, got {x.shape[-1]}")
        return Tensor(sinc_conv(x, self.filterbank, self.config.sinc_stride)[:, None])

    def __call__(self, chunks, training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        """Logits (B, 2) for a batch of pre-emphasised fixed-length chunks."""
        x_hat = self.encoder(self.features(chunks), training)
        g_t, g_s = graphs_from_features(x_hat, self.pe_t, self.pe_s)
        h_t = self.pool_t(self.gal_t(g_t, training, rng), training, rng)
        h_s = self.pool_s(self.gal_s(g_s, training, rng), training, rng)
        batch = h_t.shape[0]
        s0 = self.stack_node.reshape(1, -1) * Tensor(np.ones((batch, 1)))
        pre = HeteroState(h_t, h_s, s0)
        outputs = [branch_forward(pre, b, training, rng) for b in self.branches]
        h_t, h_s, s_f = aggregate_branches(pre, outputs, self.config.stack_combine)
        p_graph, p_hidden = self.config.readout_dropout
        return readout(h_t, h_s, s_f, self.output, training, rng, p_graph, p_hidden)

    def bonafide_probability(self, chunks, batch_size: int = 16) -> np.ndarray:
        """Eval-mode bona fide probability of each pre-emphasised chunk."""
        chunks = np.asarray(chunks, dtype=np.float64)
        if chunks.ndim == 1:
            chunks = chunks[None]
        out = []
        with no_grad():
            for start in range(0, len(chunks), batch_size):
                logits = self(chunks[start : start + batch_size], training=False)
                out.append(softmax_t(logits, axis=-1).data[:, BONAFIDE])
        return np.concatenate(out)


def score_utterance(audio, model: Aasist3Model) -> float:
    """Mean bona fide probability over overlapping fixed-length windows of the pre-emphasised signal."""
    signal = audio if isinstance(audio, AudioSignal) else AudioSignal(audio)
    cfg = model.config
    emphasised = pre_emphasis(signal.samples, cfg.pre_emphasis)
    chunks = chunk_signal(emphasised, cfg.input_seconds, cfg.hop_seconds, cfg.sample_rate)
    return float(np.mean(model.bonafide_probability(np.stack(chunks))))


def fuse_scores(scores) -> float:
    scores = [float(s) for s in scores]
    if not scores:
        raise ValueError("cannot fuse an empty list of scores")
    return float(np.mean(scores))
