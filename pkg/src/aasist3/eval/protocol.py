"""Trial lists (``utt_id wav_path label``) and score files (``utt_id score``)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ProtocolError

LABELS = ("bonafide", "spoof")


@dataclass(frozen=True)
class TrialRecord:
    utterance_id: str
    wav_path: str
    label: str

    @property
    def is_bonafide(self) -> bool:
        return self.label == "bonafide"


@dataclass(frozen=True)
class ScoreRecord:
    utterance_id: str
    score: float


def _content_lines(path: Path):
    for number, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if line and not line.startswith("#"):
            yield number, line.split()


def parse_protocol(path) -> list[TrialRecord]:
    path = Path(path)
    trials, seen = [], set()
    for number, fields in _content_lines(path):
        if len(fields) != 3:
            raise ProtocolError(f"expected 'utt_id wav_path label', got {len(fields)} fields", number, path)
        utt, wav, label = fields
        if label not in LABELS:
            raise ProtocolError(f"unknown label {label!r} (expected bonafide or spoof)", number, path)
        if utt in seen:
            raise ProtocolError(f"duplicate utterance id {utt!r}", number, path)
        seen.add(utt)
        trials.append(TrialRecord(utt, wav, label))
    return trials


def write_protocol(path, trials) -> None:
    Path(path).write_text("".join(f"{t.utterance_id} {t.wav_path} {t.label}\n" for t in trials))


def read_scores(path) -> list[ScoreRecord]:
    path = Path(path)
    records, seen = [], set()
    for number, fields in _content_lines(path):
        if len(fields) != 2:
            raise ProtocolError(f"expected 'utt_id score', got {len(fields)} fields", number, path)
        try:
            score = float(fields[1])
        except ValueError:
            raise ProtocolError(f"score {fields[1]!r} is not a number", number, path) from None
        if not math.isfinite(score):
            raise ProtocolError("score is not finite", number, path)
        if fields[0] in seen:
            raise ProtocolError(f"duplicate utterance id {fields[0]!r}", number, path)
        seen.add(fields[0])
        records.append(ScoreRecord(fields[0], score))
    return records


def write_scores(path, records) -> None:
    Path(path).write_text("".join(f"{r.utterance_id} {r.score:.6f}\n" for r in records))


def split_by_label(scores, trials) -> tuple[np.ndarray, np.ndarray]:
    """Bona fide and spoof score arrays; every trial needs exactly one score and vice versa."""
    by_id = {r.utterance_id: r.score for r in scores}
    labels = {t.utterance_id: t.label for t in trials}
    missing = sorted(set(labels) - set(by_id))
    unknown = sorted(set(by_id) - set(labels))
    if missing or unknown:
        parts = []
        if missing:
            parts.append(f"no score for {len(missing)} trial(s): {' '.join(missing[:10])}")
        if unknown:
            parts.append(f"{len(unknown)} score(s) for unknown ids: {' '.join(unknown[:10])}")
        raise ProtocolError("; ".join(parts))
    bona = np.array([by_id[u] for u, lab in labels.items() if lab == "bonafide"])
    spoof = np.array([by_id[u] for u, lab in labels.items() if lab == "spoof"])
    return bona, spoof
