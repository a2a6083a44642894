"""Audio front end: pre-emphasis, fixed sinc filterbank and chunking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

SAMPLE_RATE = 16000
PRE_EMPHASIS = 0.97


@dataclass
class AudioSignal:
    """Mono 16 kHz audio with samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if self.sample_rate != SAMPLE_RATE:
            raise ValueError(f"sample rate must be {SAMPLE_RATE}, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("audio contains non-finite samples")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def _samples(signal) -> np.ndarray:
    return signal.samples if isinstance(signal, AudioSignal) else np.asarray(signal, dtype=np.float64)


def pre_emphasis(signal, coeff: float = PRE_EMPHASIS):
    """y[0] = x[0]; y[l] = x[l] - coeff * x[l-1].

    Accepts an :class:`AudioSignal` or an array whose last axis is time, and
    returns the same kind.
    """
    if not 0.0 <= coeff < 1.0:
        raise ValueError(f"pre-emphasis coefficient must lie in [0, 1), got {coeff}")
    x = _samples(signal)
    if x.shape[-1] == 0:
        raise ValueError("pre-emphasis of an empty signal")
    y = x.copy()
    y[..., 1:] -= coeff * x[..., :-1]
    if isinstance(signal, AudioSignal):
        return AudioSignal(y, signal.sample_rate)
    return y


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_band_edges(n_filters: int, f_min: float, f_max: float, sample_rate: int = SAMPLE_RATE) -> list[tuple[float, float]]:
    """Band i spans mel points i and i+2 of n_filters+2 equally spaced mel points."""
    if n_filters < 1:
        raise ValueError("n_filters must be at least 1")
    if f_max > sample_rate / 2:
        raise ValueError(f"f_max {f_max} Hz is above Nyquist ({sample_rate / 2} Hz)")
    if not 0 < f_min < f_max:
        raise ValueError(f"need 0 < f_min < f_max, got {f_min}, {f_max}")
    points = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_filters + 2))
    points[0], points[-1] = f_min, f_max
    return [(float(points[i]), float(points[i + 2])) for i in range(n_filters)]


def hamming(kernel_len: int) -> np.ndarray:
    n = np.arange(kernel_len)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (kernel_len - 1))


def sinc_kernel(f1: float, f2: float, kernel_len: int, sample_rate: int = SAMPLE_RATE, window: bool = True) -> np.ndarray:
    """Hamming-windowed band-pass taps 2 f2 sinc(2 pi f2 n) - 2 f1 sinc(2 pi f1 n).

    Frequencies are normalised by ``sample_rate`` and ``n`` runs over the
    centred integer offsets, so the centre tap of the unwindowed kernel is
    2 (f2 - f1) / sample_rate.
    """
    if kernel_len % 2 == 0 or kernel_len < 1:
        raise ValueError(f"kernel_len must be odd, got {kernel_len}")
    if not f2 > f1:
        raise ValueError(f"need f2 > f1, got ({f1}, {f2})")
    half = (kernel_len - 1) // 2
    n = np.arange(-half, half + 1, dtype=np.float64)
    lo, hi = f1 / sample_rate, f2 / sample_rate
    # np.sinc(t) = sin(pi t) / (pi t), so np.sinc(2 f n) = sin(2 pi f n) / (2 pi f n)
    g = 2.0 * hi * np.sinc(2.0 * hi * n) - 2.0 * lo * np.sinc(2.0 * lo * n)
    if window and kernel_len > 1:
        g = g * hamming(kernel_len)
    return g


@dataclass
class SincFilterbank:
    """Fixed, non-trainable band-pass taps (n_filters x kernel_len)."""

    n_filters: int = 70
    kernel_len: int = 129
    f_min: float = 200.0
    f_max: float = 8000.0
    sample_rate: int = SAMPLE_RATE
    band_edges: list = field(init=False)
    taps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.band_edges = mel_band_edges(self.n_filters, self.f_min, self.f_max, self.sample_rate)
        self.taps = np.stack([sinc_kernel(f1, f2, self.kernel_len, self.sample_rate) for f1, f2 in self.band_edges])
        self.taps.setflags(write=False)


def sinc_conv(signal, bank: SincFilterbank, stride: int = 1) -> np.ndarray:
    """Valid-mode filtering; returns (n_filters, frames) or (B, n_filters, frames)."""
    if stride < 1:
        raise ValueError("stride must be positive")
    x = _samples(signal)
    if x.shape[-1] < bank.kernel_len:
        raise ValueError(f"signal of {x.shape[-1]} samples is shorter than the {bank.kernel_len}-tap kernel")
    windows = sliding_window_view(x, bank.kernel_len, axis=-1)[..., ::stride, :]
    # correlation with symmetric taps equals convolution
    out = windows @ bank.taps.T
    return np.swapaxes(out, -1, -2)


def conv_frames(n_samples: int, kernel_len: int, stride: int = 1) -> int:
    return (n_samples - kernel_len) // stride + 1


def cyclic_segment(x: np.ndarray, start: int, length: int) -> np.ndarray:
    """``length`` samples from ``start``, wrapping around the end of ``x``."""
    return x[(start + np.arange(length)) % x.size]


def chunk_signal(signal, win: float = 4.0, hop: float = 2.0, sample_rate: int = SAMPLE_RATE) -> list:
    """Overlapping fixed-length windows starting at 0, hop, 2 hop, ...

    The last window is right-padded by cyclic repetition of the signal when it
    runs past the end; a signal shorter than ``win`` yields a single window.
    """
    if not win > hop > 0:
        raise ValueError(f"need win > hop > 0, got win={win}, hop={hop}")
    x = _samples(signal)
    if x.size == 0:
        raise ValueError("cannot chunk an empty signal")
    w = int(round(win * sample_rate))
    h = int(round(hop * sample_rate))
    n = 1 + max(0, math.ceil((x.size - w) / h))
    chunks = [cyclic_segment(x, k * h, w) for k in range(n)]
    if isinstance(signal, AudioSignal):
        return [AudioSignal(c, signal.sample_rate) for c in chunks]
    return chunks


def random_crop(x: np.ndarray, length: int, rng: np.random.Generator) -> np.ndarray:
    """A random ``length``-sample window, cyclically padded when ``x`` is short."""
    if x.size <= length:
        return cyclic_segment(x, 0, length)
    start = int(rng.integers(0, x.size - length + 1))
    return x[start : start + length].copy()
