"""Loss, Adam and the training loop."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .checkpoint import save_checkpoint
from .config import TrainConfig
from .dsp import pre_emphasis, random_crop
from .errors import NonFiniteError
from .eval.metrics import compute_eer, compute_min_dcf
from .model import Aasist3Model, score_utterance
from .numerics import Tensor, ensure_tensor, log_softmax
from .toy import Utterance, make_toy_dataset, split_dataset

__all__ = [
    "Adam",
    "TrainResult",
    "adam_step",
    "cross_entropy",
    "evaluate_utterances",
    "make_toy_dataset",
    "split_dataset",
    "train_loop",
]


def cross_entropy(logits: Tensor, labels, weights=None) -> Tensor:
    """Batch mean of w[y] * -log softmax(logits)[y]; logits (B, C) or (C,)."""
    logits = ensure_tensor(logits)
    if logits.ndim == 1:
        logits = logits.reshape(1, -1)
    if not np.all(np.isfinite(logits.data)):
        raise NonFiniteError("non-finite logits")
    labels = np.atleast_1d(np.asarray(labels, dtype=np.intp))
    if labels.shape != (logits.shape[0],):
        raise ValueError(f"{labels.size} labels for {logits.shape[0]} logit rows")
    n_classes = logits.shape[1]
    weights = np.ones(n_classes) if weights is None else np.asarray(weights, dtype=np.float64)
    picked = np.eye(n_classes)[labels] * weights[labels][:, None]
    return -(log_softmax(logits, axis=-1) * Tensor(picked)).sum() / labels.size


def adam_step(param: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray, t: int, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One bias-corrected Adam update; returns (param, m, v) as new arrays."""
    if t < 1:
        raise ValueError("Adam step counter starts at 1")
    if not np.all(np.isfinite(grad)):
        raise NonFiniteError("non-finite gradient")
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    return param - lr * m_hat / (np.sqrt(v_hat) + eps), m, v


class Adam:
    def __init__(self, params, lr: float = 1e-4, betas=(0.9, 0.999), eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        self.t += 1
        for i, p in enumerate(self.params):
            grad = p.grad if p.grad is not None else np.zeros_like(p.data)
            p.data, self.m[i], self.v[i] = adam_step(p.data, grad, self.m[i], self.v[i], self.t, self.lr,
                                                     self.betas[0], self.betas[1], self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None


@dataclass
class TrainResult:
    model: Aasist3Model
    history: list = field(default_factory=list)
    best_epoch: int = 0


def evaluate_utterances(model: Aasist3Model, items: list[Utterance]) -> dict:
    scores = np.array([score_utterance(u.signal, model) for u in items])
    targets = np.array([u.target for u in items])
    bona, spoof = scores[targets == 1], scores[targets == 0]
    p_true = np.clip(np.where(targets == 1, scores, 1.0 - scores), 1e-12, 1.0)
    return {
        "eer": compute_eer(bona, spoof).eer,
        "min_dcf": compute_min_dcf(bona, spoof).min_dcf,
        "logloss": float(-np.mean(np.log(p_true))),
        "scores": scores,
    }


def train_loop(model: Aasist3Model, train_set: list[Utterance], config: TrainConfig,
               dev_set: list[Utterance] | None = None, callbacks: list[Callable[[dict], None]] = (),
               checkpoint_path=None) -> TrainResult:
    """Adam on random fixed-length crops; keeps the parameters of the best dev epoch.

    Without a dev set the final epoch is kept.  Every epoch produces a record
    ``{"epoch", "loss", "seconds"}`` plus dev metrics when available, which is
    passed to each callback.
    """
    if not train_set:
        raise ValueError("training set is empty")
    rng = np.random.default_rng(config.seed)
    cfg = model.config
    length = cfg.input_samples
    emphasised = [pre_emphasis(u.signal.samples, cfg.pre_emphasis) for u in train_set]
    targets = np.array([u.target for u in train_set])
    optimizer = Adam(model.parameters(), config.lr, (config.beta1, config.beta2), config.eps)
    result = TrainResult(model)
    best_key, best_state = None, None
    for epoch in range(1, config.epochs + 1):
        start = time.perf_counter()
        order = rng.permutation(len(train_set))
        losses = []
        for b in range(0, len(order), config.batch_size):
            idx = order[b : b + config.batch_size]
            batch = np.stack([random_crop(emphasised[i], length, rng) for i in idx])
            optimizer.zero_grad()
            loss = cross_entropy(model(batch, training=True, rng=rng), targets[idx], config.class_weights)
            loss.backward()
            optimizer.step()
            losses.append(loss.item())
        record = {"epoch": epoch, "loss": float(np.mean(losses))}
        if dev_set:
            dev = evaluate_utterances(model, dev_set)
            record.update(dev_eer=dev["eer"], dev_min_dcf=dev["min_dcf"], dev_logloss=dev["logloss"])
            key = (dev["eer"], dev["logloss"])
        else:
            key = (-epoch,)
        if best_key is None or key < best_key:
            best_key = key
            best_state = {k: v.copy() for k, v in model.state_dict().items()}
            result.best_epoch = epoch
        record["seconds"] = time.perf_counter() - start
        result.history.append(record)
        for callback in callbacks:
            callback(record)
        if checkpoint_path is not None and (epoch % config.checkpoint_every == 0 or epoch == config.epochs):
            _save_state(model, best_state, checkpoint_path)
    model.load_state_dict(best_state)
    return result


def _save_state(model: Aasist3Model, state: dict, path) -> None:
    current = {k: v.copy() for k, v in model.state_dict().items()}
    model.load_state_dict(state)
    save_checkpoint(model, Path(path))
    model.load_state_dict(current)
