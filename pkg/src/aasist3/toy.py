"""A synthetic two-class corpus that stands in for real spoofing data at desk scale.

Bona fide items are a few sinusoidal partials under slow amplitude modulation
with a little pink noise.  Spoof items are built the same way and then pushed
through 4-bit amplitude quantisation and a short feed-forward comb filter,
which leaves broadband quantisation noise and regularly spaced notches in the
upper band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import welch

from .dsp import SAMPLE_RATE, AudioSignal

BONAFIDE_LABEL, SPOOF_LABEL = "bonafide", "spoof"


@dataclass
class Utterance:
    utterance_id: str
    signal: AudioSignal
    label: str

    @property
    def target(self) -> int:
        return 1 if self.label == BONAFIDE_LABEL else 0


def pink_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    spectrum = np.fft.rfft(rng.standard_normal(n))
    f = np.arange(spectrum.size, dtype=np.float64)
    f[0] = 1.0
    x = np.fft.irfft(spectrum / np.sqrt(f), n)
    return x / (np.std(x) + 1e-12)


def _voice(rng: np.random.Generator) -> np.ndarray:
    n = int(rng.uniform(4.0, 6.0) * SAMPLE_RATE)
    t = np.arange(n) / SAMPLE_RATE
    x = np.zeros(n)
    for _ in range(int(rng.integers(3, 6))):
        freq = rng.uniform(100.0, 4000.0)
        x += rng.uniform(0.2, 1.0) * np.sin(2 * np.pi * freq * t + rng.uniform(0, 2 * np.pi))
    x *= 1.0 + 0.5 * np.sin(2 * np.pi * rng.uniform(0.5, 3.0) * t + rng.uniform(0, 2 * np.pi))
    x /= np.max(np.abs(x)) + 1e-12
    x = 0.5 * x + 0.01 * pink_noise(n, rng)
    return x


def quantize(x: np.ndarray, bits: int = 4) -> np.ndarray:
    levels = 2 ** (bits - 1)
    return np.clip(np.round(x * levels), -levels, levels - 1) / levels


def comb(x: np.ndarray, delay: int, gain: float = 0.5) -> np.ndarray:
    y = x.copy()
    y[delay:] += gain * x[:-delay]
    return y / (1.0 + gain)


def make_utterance(label: str, rng: np.random.Generator) -> np.ndarray:
    x = _voice(rng)
    if label == SPOOF_LABEL:
        x = comb(quantize(x), int(rng.integers(8, 21)))
    return np.clip(x, -1.0, 1.0)


def make_toy_dataset(n_per_class: int, seed: int) -> list[Utterance]:
    """2 * n_per_class utterances, classes interleaved, deterministic in ``seed``."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be at least 1")
    items = []
    for i in range(2 * n_per_class):
        label = BONAFIDE_LABEL if i % 2 == 0 else SPOOF_LABEL
        rng = np.random.default_rng([seed, i])
        items.append(Utterance(f"toy_{i:05d}", AudioSignal(make_utterance(label, rng)), label))
    return items


def split_dataset(items: list[Utterance], seed: int, fractions=(0.6, 0.2, 0.2)) -> dict[str, list[Utterance]]:
    """Stratified train/dev/eval split."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("split fractions must sum to 1")
    rng = np.random.default_rng(seed)
    splits = {"train": [], "dev": [], "eval": []}
    for label in (BONAFIDE_LABEL, SPOOF_LABEL):
        group = [u for u in items if u.label == label]
        order = rng.permutation(len(group))
        n_train = int(round(fractions[0] * len(group)))
        n_dev = int(round(fractions[1] * len(group)))
        for k, idx in enumerate(order):
            name = "train" if k < n_train else "dev" if k < n_train + n_dev else "eval"
            splits[name].append(group[idx])
    for name in splits:
        splits[name].sort(key=lambda u: u.utterance_id)
    return splits


def spectral_flatness(x: np.ndarray, band=(4000.0, 8000.0), sample_rate: int = SAMPLE_RATE) -> float:
    """Geometric over arithmetic mean of the Welch power spectrum inside ``band``."""
    f, p = welch(np.asarray(x, dtype=np.float64), fs=sample_rate, nperseg=512)
    p = p[(f >= band[0]) & (f <= band[1])] + 1e-20
    return float(np.exp(np.mean(np.log(p))) / np.mean(p))
