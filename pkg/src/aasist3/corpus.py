"""On-disk corpus layout: ``protocol.txt`` plus a ``wav/`` directory, with optional split protocols."""

from __future__ import annotations

from pathlib import Path

from .eval.protocol import TrialRecord, parse_protocol, write_protocol
from .errors import ProtocolError
from .toy import Utterance, make_toy_dataset, split_dataset
from .wavio import read_wav, write_wav

SPLITS = ("train", "dev", "eval")


def split_protocol_path(root, split: str) -> Path:
    return Path(root) / f"protocol_{split}.txt"


def write_toy_corpus(root, n_per_class: int, seed: int) -> list[TrialRecord]:
    root = Path(root)
    (root / "wav").mkdir(parents=True, exist_ok=True)
    items = make_toy_dataset(n_per_class, seed)
    trials = []
    for item in items:
        rel = f"wav/{item.utterance_id}.wav"
        write_wav(root / rel, item.signal)
        trials.append(TrialRecord(item.utterance_id, rel, item.label))
    write_protocol(root / "protocol.txt", trials)
    by_id = {t.utterance_id: t for t in trials}
    for split, members in split_dataset(items, seed).items():
        write_protocol(split_protocol_path(root, split), [by_id[u.utterance_id] for u in members])
    return trials


def missing_wavs(trials: list[TrialRecord], base) -> list[str]:
    return [t.utterance_id for t in trials if not (Path(base) / t.wav_path).is_file()]


def load_trials(protocol) -> tuple[list[TrialRecord], list[Utterance]]:
    """Parse ``protocol`` and read every WAV, resolving paths against the protocol's directory."""
    protocol = Path(protocol)
    trials = parse_protocol(protocol)
    missing = missing_wavs(trials, protocol.parent)
    if missing:
        raise ProtocolError(f"{len(missing)} WAV file(s) missing for ids: {' '.join(missing[:20])}", path=protocol)
    items = [Utterance(t.utterance_id, read_wav(protocol.parent / t.wav_path), t.label) for t in trials]
    return trials, items
