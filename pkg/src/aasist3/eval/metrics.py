"""Equal error rate and minimum detection cost over a threshold sweep.

A trial is accepted as bona fide when its score is >= the threshold.  The
sweep visits one threshold below every score, one between each pair of
adjacent distinct scores and one above every score, which realises every
achievable (false-acceptance, false-rejection) pair.  Error counts are kept
as integers so that interpolated rates are computed exactly and converted to
float only at the end.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import numpy as np


class EerResult(NamedTuple):
    eer: float
    threshold: float


class DcfResult(NamedTuple):
    min_dcf: float
    threshold: float


class Sweep(NamedTuple):
    thresholds: np.ndarray  # ascending, first is -inf and last +inf
    false_accepts: np.ndarray  # spoof trials with score >= threshold
    misses: np.ndarray  # bona fide trials with score < threshold
    n_bonafide: int
    n_spoof: int


def _check(bonafide, spoof) -> tuple[np.ndarray, np.ndarray]:
    bonafide = np.asarray(bonafide, dtype=np.float64).reshape(-1)
    spoof = np.asarray(spoof, dtype=np.float64).reshape(-1)
    if bonafide.size == 0 or spoof.size == 0:
        raise ValueError("need at least one bona fide and one spoof score")
    if not (np.all(np.isfinite(bonafide)) and np.all(np.isfinite(spoof))):
        raise ValueError("scores must be finite")
    return bonafide, spoof


def threshold_sweep(bonafide, spoof) -> Sweep:
    bonafide, spoof = _check(bonafide, spoof)
    values = np.unique(np.concatenate([bonafide, spoof]))
    mids = (values[:-1] + values[1:]) / 2.0
    thresholds = np.concatenate([[-np.inf], mids, [np.inf]])
    # trials with score >= threshold; for midpoints this is "score > lower value"
    above_b = np.concatenate([[bonafide.size], bonafide.size - np.searchsorted(np.sort(bonafide), values, side="right")])
    above_s = np.concatenate([[spoof.size], spoof.size - np.searchsorted(np.sort(spoof), values, side="right")])
    return Sweep(thresholds, above_s, bonafide.size - above_b, bonafide.size, spoof.size)


def _diagonal_crossing(p1, p2) -> Fraction:
    """Where the segment between two (x, y) points meets x = y."""
    d1, d2 = p1[0] - p1[1], p2[0] - p2[1]
    if d1 == d2:
        return Fraction(p1[0])
    return Fraction(d1 * p2[0] - d2 * p1[0], d1 - d2)


def _scaled_points(sweep: Sweep) -> list[tuple[int, int]]:
    # (false-accept rate, miss rate) scaled by n_b * n_s to integers
    return [(int(fa) * sweep.n_bonafide, int(m) * sweep.n_spoof) for fa, m in zip(sweep.false_accepts, sweep.misses)]


def _interp_threshold(sweep: Sweep, i: int, j: int, d_i: int, d_j: int) -> float:
    ti, tj = sweep.thresholds[i], sweep.thresholds[j]
    if not np.isfinite(ti):
        return float(tj) if np.isfinite(tj) else 0.0
    if not np.isfinite(tj) or d_i == d_j:
        return float(ti)
    w = d_i / (d_i - d_j)
    return float(ti + w * (tj - ti))


def crossing_eer(bonafide, spoof) -> EerResult:
    """Linear interpolation between the adjacent sweep points where FRR overtakes FAR."""
    sweep = threshold_sweep(bonafide, spoof)
    pts = _scaled_points(sweep)
    scale = sweep.n_bonafide * sweep.n_spoof
    for i in range(1, len(pts)):
        if pts[i][1] >= pts[i][0]:
            d_prev, d_cur = pts[i - 1][0] - pts[i - 1][1], pts[i][0] - pts[i][1]
            value = _diagonal_crossing(pts[i - 1], pts[i]) / scale
            return EerResult(float(value), _interp_threshold(sweep, i - 1, i, d_prev, d_cur))
    raise AssertionError("sweep always ends with FRR = 1 >= FAR = 0")


def _lower_hull(pts: list[tuple[int, int]]) -> list[int]:
    """Indices of the lower-left convex hull of points ordered by decreasing x."""
    hull: list[int] = []
    for k in range(len(pts)):
        while len(hull) >= 2:
            (x1, y1), (x2, y2), (x3, y3) = pts[hull[-2]], pts[hull[-1]], pts[k]
            # keep the middle point only on a strict clockwise turn
            if (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


def rocch_eer(bonafide, spoof) -> EerResult:
    """EER on the convex hull of the ROC, i.e. the best rate reachable by mixing two thresholds."""
    sweep = threshold_sweep(bonafide, spoof)
    pts = _scaled_points(sweep)
    scale = sweep.n_bonafide * sweep.n_spoof
    hull = _lower_hull(pts)
    for a, b in zip(hull[:-1], hull[1:]):
        d_a, d_b = pts[a][0] - pts[a][1], pts[b][0] - pts[b][1]
        if d_a >= 0 >= d_b:
            value = _diagonal_crossing(pts[a], pts[b]) / scale
            return EerResult(float(value), _interp_threshold(sweep, a, b, d_a, d_b))
    raise AssertionError("hull always runs from FAR = 1 to FRR = 1")


def compute_eer(bonafide, spoof, method: str = "rocch") -> EerResult:
    """Equal error rate in [0, 1] and its threshold.

    ``method="rocch"`` (default) uses the ROC convex hull, ``"crossing"`` the
    raw sweep curve.  They agree whenever the raw curve is already convex at
    its equal-error point.
    """
    if method == "rocch":
        return rocch_eer(bonafide, spoof)
    if method == "crossing":
        return crossing_eer(bonafide, spoof)
    raise ValueError(f"unknown EER method {method!r}")


def compute_min_dcf(bonafide, spoof, p_target: float = 0.05, c_miss: float = 1.0, c_fa: float = 10.0) -> DcfResult:
    """Minimum normalised detection cost over the sweep (1.0 is the cost of a fixed decision)."""
    if not 0.0 < p_target < 1.0:
        raise ValueError("p_target must lie in (0, 1)")
    if c_miss <= 0 or c_fa <= 0:
        raise ValueError("costs must be positive")
    sweep = threshold_sweep(bonafide, spoof)
    p_miss = sweep.misses / sweep.n_bonafide
    p_fa = sweep.false_accepts / sweep.n_spoof
    dcf = detection_cost(p_miss, p_fa, p_target, c_miss, c_fa)
    i = int(np.argmin(dcf))
    return DcfResult(float(dcf[i]), float(sweep.thresholds[i]))


def detection_cost(p_miss, p_fa, p_target: float, c_miss: float, c_fa: float):
    norm = min(p_target * c_miss, (1.0 - p_target) * c_fa)
    return (p_target * c_miss * np.asarray(p_miss) + (1.0 - p_target) * c_fa * np.asarray(p_fa)) / norm
