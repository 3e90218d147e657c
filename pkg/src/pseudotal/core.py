"""Temporal grid, intervals, proposal types, and temporal IoU.

Everything downstream (extraction, fusion, masking, target building,
evaluation) works on these types. Public boundaries are expressed in
seconds; snippet indices appear only when converting to or from a grid.
All types are immutable after construction and all functions are pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TimeGrid",
    "Interval",
    "Proposal",
    "PseudoProposal",
    "SnippetPredictions",
    "tiou",
    "snippet_index_to_interval",
    "snippet_centers",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform snippet grid of a single video.

    num_snippets: number of temporal snippets (T).
    snippet_duration_s: seconds covered by one snippet.
    class_count: number of foreground action classes (C).
    """

    num_snippets: int
    snippet_duration_s: float
    class_count: int

    def __post_init__(self) -> None:
        if self.num_snippets < 1:
            raise ValueError("num_snippets must be >= 1")
        if not (math.isfinite(self.snippet_duration_s) and self.snippet_duration_s > 0):
            raise ValueError("snippet_duration_s must be a positive finite real")
        if self.class_count < 1:
            raise ValueError("class_count must be >= 1")

    @property
    def duration_s(self) -> float:
        """Total video extent in seconds."""
        return self.num_snippets * self.snippet_duration_s


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open-by-convention temporal interval [start_s, end_s), start < end."""

    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.start_s) and math.isfinite(self.end_s)):
            raise ValueError("interval endpoints must be finite")
        if not self.start_s < self.end_s:
            raise ValueError("interval requires start_s < end_s")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def midpoint_s(self) -> float:
        return 0.5 * (self.start_s + self.end_s)


@dataclass(frozen=True)
class Proposal:
    """A scored class-specific temporal detection."""

    interval: Interval
    score: float
    class_id: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ValueError("proposal score must be finite")
        if self.class_id < 1:
            raise ValueError("class_id must be >= 1")


@dataclass(frozen=True)
class PseudoProposal:
    """A fused segment used as a training label, with a confidence weight."""

    interval: Interval
    class_id: int
    confidence: float

    def __post_init__(self) -> None:
        if self.class_id < 1:
            raise ValueError("class_id must be >= 1")
        if not (math.isfinite(self.confidence) and self.confidence >= 0.0):
            raise ValueError("confidence must be finite and >= 0")

    def as_proposal(self, score_scale: float = 1.0) -> Proposal:
        return Proposal(self.interval, self.confidence * score_scale, self.class_id)


@dataclass(frozen=True, eq=False)
class SnippetPredictions:
    """Per-video snippet outputs of an attention + classification branch.

    attention: (T,) class-agnostic foreground attention in [0, 1].
    class_scores: (T, C+1) per-snippet class distribution; the last
        column is the background class and each row sums to one.
    """

    attention: np.ndarray
    class_scores: np.ndarray
    video_id: str = ""

    def __post_init__(self) -> None:
        att = np.asarray(self.attention, dtype=np.float64)
        cls = np.asarray(self.class_scores, dtype=np.float64)
        if att.ndim != 1:
            raise ValueError("attention must be one-dimensional")
        if cls.ndim != 2 or cls.shape[0] != att.shape[0]:
            raise ValueError("class_scores must be (T, C+1) with T matching attention")
        if cls.shape[1] < 2:
            raise ValueError("class_scores needs at least one foreground column plus background")
        if att.size and (att.min() < -1e-9 or att.max() > 1 + 1e-9):
            raise ValueError("attention values must lie in [0, 1]")
        row_sums = cls.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > 1e-6):
            raise ValueError("class_scores rows must sum to 1 within 1e-6")
        att.setflags(write=False)
        cls.setflags(write=False)
        object.__setattr__(self, "attention", att)
        object.__setattr__(self, "class_scores", cls)

    @property
    def num_snippets(self) -> int:
        return int(self.attention.shape[0])

    @property
    def class_count(self) -> int:
        return int(self.class_scores.shape[1]) - 1


def tiou(a: Interval, b: Interval) -> float:
    """Temporal intersection over union of two intervals; 0 when disjoint."""
    inter = min(a.end_s, b.end_s) - max(a.start_s, b.start_s)
    if inter <= 0.0:
        return 0.0
    union = a.duration_s + b.duration_s - inter
    return inter / union


def snippet_index_to_interval(grid: TimeGrid, i: int) -> Interval:
    """Time extent [i*dur, (i+1)*dur] of snippet i."""
    if not 0 <= i < grid.num_snippets:
        raise IndexError("snippet index out of grid")
    dur = grid.snippet_duration_s
    return Interval(i * dur, (i + 1) * dur)


def snippet_centers(grid: TimeGrid) -> np.ndarray:
    """Center times (seconds) of every snippet on the grid."""
    dur = grid.snippet_duration_s
    return (np.arange(grid.num_snippets, dtype=np.float64) + 0.5) * dur
