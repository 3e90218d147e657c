"""Weak-branch math: top-k aggregation, MIL loss, snippet-level fusion,
multi-threshold proposal extraction, outer-inner-contrastive scoring, and
soft non-maximum suppression.

These are pure functions over prediction arrays; no training happens here.
The attention/classification predictions come either from a real extractor
or from the simulator in :mod:`pseudotal.sim`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Interval, Proposal, SnippetPredictions, TimeGrid

__all__ = [
    "VideoLevelScores",
    "VideoLabel",
    "topk_aggregate",
    "mil_loss",
    "compute_sps",
    "extract_proposals",
    "oic_score",
    "soft_nms",
    "weak_proposals",
]

LOG_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class VideoLevelScores:
    """Video-level class scores: plain aggregation and attention-suppressed."""

    base: np.ndarray
    suppressed: np.ndarray

    def __post_init__(self) -> None:
        base = np.asarray(self.base, dtype=np.float64)
        supp = np.asarray(self.suppressed, dtype=np.float64)
        if base.ndim != 1 or base.shape != supp.shape:
            raise ValueError("base and suppressed must be equal-length vectors")
        for name, vec in (("base", base), ("suppressed", supp)):
            if vec.size and (vec.min() < -1e-9 or vec.max() > 1 + 1e-9):
                raise ValueError(f"{name} entries must lie in [0, 1]")
        base.setflags(write=False)
        supp.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "suppressed", supp)


@dataclass(frozen=True, eq=False)
class VideoLabel:
    """Multi-hot video-level label over the C foreground classes."""

    onehot: np.ndarray

    def __post_init__(self) -> None:
        vec = np.asarray(self.onehot, dtype=np.int64)
        if vec.ndim != 1 or not np.all((vec == 0) | (vec == 1)):
            raise ValueError("onehot must be a binary vector")
        if vec.sum() < 1:
            raise ValueError("video label requires at least one positive class")
        vec.setflags(write=False)
        object.__setattr__(self, "onehot", vec)

    @classmethod
    def from_classes(cls, classes: Sequence[int], class_count: int) -> "VideoLabel":
        vec = np.zeros(class_count, dtype=np.int64)
        for c in classes:
            if not 1 <= c <= class_count:
                raise ValueError("class_id out of range for video label")
            vec[c - 1] = 1
        return cls(vec)

    @property
    def classes(self) -> list[int]:
        """Present foreground classes as 1-based ids."""
        return [int(i) + 1 for i in np.flatnonzero(self.onehot)]


def topk_aggregate(preds: SnippetPredictions, k_ratio: float) -> VideoLevelScores:
    """Mean of the k largest entries per class column, k = max(1, floor(T / k_ratio)).

    `base` aggregates the raw class scores; `suppressed` aggregates the
    attention-weighted scores.
    """
    t = preds.num_snippets
    k = max(1, math.floor(t / k_ratio))
    if k > t:
        raise ValueError("k_ratio yields k larger than the number of snippets")
    base_src = preds.class_scores
    supp_src = preds.attention[:, None] * preds.class_scores

    def col_topk_mean(mat: np.ndarray) -> np.ndarray:
        if k == t:
            return mat.mean(axis=0)
        part = np.partition(mat, t - k, axis=0)[t - k :]
        return part.mean(axis=0)

    return VideoLevelScores(col_topk_mean(base_src), col_topk_mean(supp_src))


def mil_loss(scores: VideoLevelScores, label: VideoLabel) -> float:
    """Multi-instance classification loss against extended video labels.

    The label is extended with a background entry: 1 for the plain scores
    (background is present in every untrimmed video) and 0 for the
    attention-suppressed scores. Scores are clamped to [1e-12, 1] before
    the log so perfect-zero predictions stay finite.
    """
    c = label.onehot.shape[0]
    if scores.base.shape[0] != c + 1:
        raise ValueError("scores must have C+1 entries matching the label")
    y_base = np.concatenate([label.onehot.astype(np.float64), [1.0]])
    y_supp = np.concatenate([label.onehot.astype(np.float64), [0.0]])
    log_base = np.log(np.clip(scores.base, LOG_EPS, 1.0))
    log_supp = np.log(np.clip(scores.suppressed, LOG_EPS, 1.0))
    return float(-(y_base @ log_base + y_supp @ log_supp) + 0.0)


def compute_sps(attention: np.ndarray, class_scores: np.ndarray) -> np.ndarray:
    """Attention-suppressed snippet-level predictions: Z[t, c] = attention[t] * scores[t, c]."""
    att = np.asarray(attention, dtype=np.float64)
    cls = np.asarray(class_scores, dtype=np.float64)
    if att.ndim != 1 or cls.ndim != 2 or cls.shape[0] != att.shape[0]:
        raise ValueError("attention and class_scores shapes disagree")
    return att[:, None] * cls


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as inclusive (first, last) index pairs."""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return [(int(edges[i]), int(edges[i + 1]) - 1) for i in range(0, len(edges), 2)]


def extract_proposals(
    sps: np.ndarray,
    grid: TimeGrid,
    thresholds: Sequence[float],
    video_label: VideoLabel,
) -> list[Proposal]:
    """Multi-threshold run extraction over the foreground SP channels.

    For every class present in the video label and every threshold, each
    maximal contiguous run of snippets at or above the threshold becomes a
    proposal. Identical (class, run) pairs produced by different thresholds
    are deduplicated. Scores are left at 0 and assigned by `oic_score`.
    """
    if len(thresholds) == 0:
        raise ValueError("thresholds must be nonempty")
    for th in thresholds:
        if not 0.0 < th < 1.0:
            raise ValueError("thresholds must lie in (0, 1)")
    z = np.asarray(sps, dtype=np.float64)
    if z.shape[0] != grid.num_snippets or z.shape[1] != grid.class_count + 1:
        raise ValueError("SP matrix shape disagrees with grid")
    dur = grid.snippet_duration_s
    seen: set[tuple[int, int, int]] = set()
    for class_id in video_label.classes:
        if class_id > grid.class_count:
            raise ValueError("video label class out of grid range")
        col = z[:, class_id - 1]
        for th in thresholds:
            for first, last in _runs(col >= th):
                seen.add((class_id, first, last))
    out = [
        Proposal(Interval(first * dur, (last + 1) * dur), 0.0, class_id)
        for class_id, first, last in sorted(seen)
    ]
    return out


def oic_score(
    sps_column: np.ndarray,
    proposal: Interval,
    grid: TimeGrid,
    inflation: float = 0.25,
) -> float:
    """Outer-inner contrast: inner mean minus the mean over flanking regions.

    Flanks extend `inflation * duration` seconds on each side, clipped to
    the video extent. Snippet membership is decided by the snippet center.
    If both flanks clip away entirely the outer mean is taken as 0.
    """
    if not 0.0 < inflation <= 1.0:
        raise ValueError("inflation must lie in (0, 1]")
    col = np.asarray(sps_column, dtype=np.float64)
    if col.shape[0] != grid.num_snippets:
        raise ValueError("SP column length disagrees with grid")
    dur = grid.snippet_duration_s
    centers = (np.arange(grid.num_snippets) + 0.5) * dur
    inner = (centers >= proposal.start_s) & (centers < proposal.end_s)
    flank = inflation * proposal.duration_s
    left_lo = max(proposal.start_s - flank, 0.0)
    right_hi = min(proposal.end_s + flank, grid.duration_s)
    outer = ((centers >= left_lo) & (centers < proposal.start_s)) | (
        (centers >= proposal.end_s) & (centers < right_hi)
    )
    inner_mean = float(col[inner].mean()) if inner.any() else 0.0
    outer_mean = float(col[outer].mean()) if outer.any() else 0.0
    return inner_mean - outer_mean


def soft_nms(
    proposals: Sequence[Proposal],
    sigma_nms: float = 0.5,
    min_score: float = 0.001,
) -> list[Proposal]:
    """Classwise Gaussian soft-NMS.

    Repeatedly selects the highest-scoring remaining proposal and decays
    every other same-class score by exp(-tiou^2 / sigma_nms). Proposals
    whose decayed score falls below `min_score` are dropped, as is any
    unselected remainder once the running maximum drops below it. Output
    is sorted by final score descending; intervals and classes are never
    modified.
    """
    if sigma_nms <= 0:
        raise ValueError("sigma_nms must be positive")
    out: list[Proposal] = []
    by_class: dict[int, list[Proposal]] = {}
    for p in proposals:
        by_class.setdefault(p.class_id, []).append(p)
    for class_id in sorted(by_class):
        group = by_class[class_id]
        starts = np.array([p.interval.start_s for p in group])
        ends = np.array([p.interval.end_s for p in group])
        scores = np.array([p.score for p in group], dtype=np.float64)
        alive = np.ones(len(group), dtype=bool)
        while alive.any():
            idxs = np.flatnonzero(alive)
            # highest current score; ties broken by earliest interval
            best = min(idxs, key=lambda i: (-scores[i], starts[i], ends[i]))
            if scores[best] < min_score:
                break
            out.append(Proposal(group[best].interval, float(scores[best]), class_id))
            alive[best] = False
            rest = np.flatnonzero(alive)
            if rest.size == 0:
                break
            inter = np.minimum(ends[rest], ends[best]) - np.maximum(starts[rest], starts[best])
            inter = np.clip(inter, 0.0, None)
            union = (ends[rest] - starts[rest]) + (ends[best] - starts[best]) - inter
            overlap = inter / union
            scores[rest] = scores[rest] * np.exp(-(overlap**2) / sigma_nms)
            alive[rest[scores[rest] < min_score]] = False
    out.sort(key=lambda p: (-p.score, p.class_id, p.interval.start_s, p.interval.end_s))
    return out


def weak_proposals(
    preds: SnippetPredictions,
    grid: TimeGrid,
    label: VideoLabel,
    thresholds: Sequence[float],
    oic_inflation: float = 0.25,
    sigma_nms: float = 0.5,
    min_score: float = 0.001,
    extract_on: str = "sps",
) -> list[Proposal]:
    """Full weak-branch post-processing: extract, score, suppress.

    `extract_on` selects the thresholded signal: "sps" thresholds the
    attention-suppressed class scores, "attention" thresholds the raw
    attention track (the same runs for every labelled class, later
    separated by their per-class contrast scores).
    """
    z = compute_sps(preds.attention, preds.class_scores)
    if extract_on == "sps":
        source = z
    elif extract_on == "attention":
        source = np.repeat(preds.attention[:, None], grid.class_count + 1, axis=1)
    else:
        raise ValueError("extract_on must be 'sps' or 'attention'")
    raw = extract_proposals(source, grid, thresholds, label)
    scored = [
        Proposal(
            p.interval,
            oic_score(z[:, p.class_id - 1], p.interval, grid, oic_inflation),
            p.class_id,
        )
        for p in raw
    ]
    return soft_nms(scored, sigma_nms=sigma_nms, min_score=min_score)
