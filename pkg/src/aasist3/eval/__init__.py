"""Countermeasure metrics and trial/score file formats."""

from .metrics import (
    DcfResult,
    EerResult,
    Sweep,
    compute_eer,
    compute_min_dcf,
    crossing_eer,
    detection_cost,
    rocch_eer,
    threshold_sweep,
)
from .protocol import (
    LABELS,
    ScoreRecord,
    TrialRecord,
    parse_protocol,
    read_scores,
    split_by_label,
    write_protocol,
    write_scores,
)

__all__ = [
    "LABELS",
    "DcfResult",
    "EerResult",
    "ScoreRecord",
    "Sweep",
    "TrialRecord",
    "compute_eer",
    "compute_min_dcf",
    "crossing_eer",
    "detection_cost",
    "parse_protocol",
    "read_scores",
    "rocch_eer",
    "split_by_label",
    "threshold_sweep",
    "write_protocol",
    "write_scores",
]
