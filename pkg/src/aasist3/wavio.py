"""16-bit PCM mono WAV reading and writing."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from .dsp import SAMPLE_RATE, AudioSignal
from .errors import WavBitDepthError, WavChannelError, WavFormatError, WavSampleRateError


def read_wav(path) -> AudioSignal:
    """Read a RIFF/WAVE PCM16 mono 16 kHz file; samples are int16 / 32768."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as fh:
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            rate = fh.getframerate()
            n = fh.getnframes()
            if channels != 1:
                raise WavChannelError(f"{path}: expected mono, got {channels} channels")
            if width != 2:
                raise WavBitDepthError(f"{path}: expected 16-bit samples, got {8 * width}-bit")
            if rate != SAMPLE_RATE:
                raise WavSampleRateError(f"{path}: expected {SAMPLE_RATE} Hz, got {rate} Hz")
            raw = fh.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise WavFormatError(f"{path}: malformed WAV header ({exc})") from exc
    if len(raw) != 2 * n:
        raise WavFormatError(f"{path}: truncated data chunk ({len(raw)} of {2 * n} bytes)")
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return AudioSignal(samples, rate)


def to_pcm16(samples: np.ndarray) -> np.ndarray:
    return np.clip(np.round(np.asarray(samples) * 32768.0), -32768, 32767).astype("<i2")


def write_wav(path, signal) -> None:
    samples = signal.samples if isinstance(signal, AudioSignal) else np.asarray(signal)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(SAMPLE_RATE)
        fh.writeframes(to_pcm16(samples).tobytes())
