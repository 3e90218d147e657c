"""Wavelet-based proposal fusion and baseline label-generation strategies.

Each scored proposal is mapped onto a Ricker (mexican-hat) wavelet whose
zero crossings sit exactly on the proposal boundaries: positive inside,
negative outside. Summing the confidence-weighted wavelets of all
proposals of a class gives one shared sequence per class, and the regions
where that sequence stays positive become the fused pseudo labels. The
negative side lobes let strong proposals suppress weak stragglers nearby,
which is what collapses a stack of overlapping threshold variants into a
single clean segment.

Five simpler strategies (hard snippet assignment, keep-all, top-k,
score threshold, Gaussian boundary averaging) are provided for
benchmarking against the wavelet fusion.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Interval, Proposal, PseudoProposal, TimeGrid, snippet_centers, tiou

__all__ = [
    "FusedWavelet",
    "RickerParams",
    "FusionStrategy",
    "ricker_value",
    "fuse_ricker",
    "segments_from_wavelet",
    "fuse_baseline",
    "generate_pseudo_labels",
]


@dataclass(frozen=True)
class RickerParams:
    """Wavelet shape for one proposal: half-duration sigma and midpoint m."""

    sigma: float
    midpoint: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError("sigma must be positive")

    @classmethod
    def from_interval(cls, interval: Interval) -> "RickerParams":
        return cls(0.5 * interval.duration_s, interval.midpoint_s)


@dataclass(frozen=True, eq=False)
class FusedWavelet:
    """Per-class fused wavelet values sampled at snippet centers, shape (T, C)."""

    values: np.ndarray
    grid: TimeGrid

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.num_snippets, self.grid.class_count):
            raise ValueError("wavelet values must have shape (T, C)")
        if not np.all(np.isfinite(vals)):
            raise ValueError("wavelet values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def ricker_value(t: float | np.ndarray, params: RickerParams) -> float | np.ndarray:
    """Ricker wavelet normalized so the peak area integrates like a unit pulse.

    Zero exactly at midpoint +- sigma (the proposal boundaries), maximal at
    the midpoint, and negative everywhere outside the boundaries.
    """
    u = (np.asarray(t, dtype=np.float64) - params.midpoint) / params.sigma
    amp = 2.0 / (math.sqrt(3.0 * params.sigma) * math.pi**0.25)
    out = amp * (1.0 - u**2) * np.exp(-0.5 * u**2)
    if np.ndim(t) == 0:
        return float(out)
    return out


def fuse_ricker(proposals: Sequence[Proposal], grid: TimeGrid) -> FusedWavelet:
    """Sum confidence-weighted proposal wavelets into one (T, C) space.

    Each proposal contributes score * wavelet to its own class channel,
    sampled at snippet centers. Proposals with non-positive score are
    excluded: a negative weight would flip the wavelet's suppression
    semantics. An empty input produces the zero wavelet.
    """
    values = np.zeros((grid.num_snippets, grid.class_count), dtype=np.float64)
    centers = snippet_centers(grid)
    for p in proposals:
        if not 1 <= p.class_id <= grid.class_count:
            raise ValueError("proposal class out of grid range")
        if p.score <= 0.0:
            continue
        wav = ricker_value(centers, RickerParams.from_interval(p.interval))
        values[:, p.class_id - 1] += p.score * wav
    return FusedWavelet(values, grid)


def _interp_zero(t0: float, v0: float, t1: float, v1: float) -> float:
    """Linear zero crossing between (t0, v0 <= 0) and (t1, v1 > 0) or the reverse."""
    return t0 + (t1 - t0) * (0.0 - v0) / (v1 - v0)


def segments_from_wavelet(
    wavelet: FusedWavelet, min_duration_s: float = 0.0
) -> list[PseudoProposal]:
    """Threshold the fused wavelet at zero into pseudo proposals.

    Per class, every maximal run of snippets with strictly positive value
    becomes one pseudo proposal. Boundaries are refined by linearly
    interpolating the zero crossing between the outermost positive snippet
    center and its non-positive neighbor; runs touching the video edge
    clamp to the edge. Runs whose refined duration falls below
    `min_duration_s` are dropped. Confidence is the run's peak value.
    """
    if min_duration_s < 0:
        raise ValueError("min_duration_s must be nonnegative")
    grid = wavelet.grid
    centers = snippet_centers(grid)
    out: list[PseudoProposal] = []
    for col in range(grid.class_count):
        vals = wavelet.values[:, col]
        positive = vals > 0.0
        padded = np.concatenate([[False], positive, [False]])
        edges = np.flatnonzero(padded[1:] != padded[:-1])
        for k in range(0, len(edges), 2):
            first, last = int(edges[k]), int(edges[k + 1]) - 1
            if first == 0:
                start = 0.0
            else:
                start = _interp_zero(
                    centers[first - 1], vals[first - 1], centers[first], vals[first]
                )
            if last == grid.num_snippets - 1:
                end = grid.duration_s
            else:
                end = _interp_zero(centers[last], vals[last], centers[last + 1], vals[last + 1])
            if end - start < min_duration_s or end <= start:
                continue
            confidence = float(vals[first : last + 1].max())
            out.append(PseudoProposal(Interval(start, end), col + 1, confidence))
    out.sort(key=lambda p: (p.class_id, p.interval.start_s, p.interval.end_s))
    return out


class FusionStrategy(enum.Enum):
    """Baseline pseudo-label generation strategies."""

    HARD = "hard"
    SOFT = "soft"
    TOPK = "topk"
    THRESHOLD = "threshold"
    GAUSS = "gauss"


def _to_pseudo(p: Proposal) -> PseudoProposal:
    return PseudoProposal(p.interval, p.class_id, max(p.score, 0.0))


def _fuse_hard(proposals: Sequence[Proposal], grid: TimeGrid) -> list[PseudoProposal]:
    """Winner-takes-all snippet ownership followed by re-segmentation.

    Every snippet belongs to the highest-scoring proposal covering its
    center (or to background); maximal runs owned by one proposal become
    the output segments, so overlapped proposals get carved up.
    """
    centers = snippet_centers(grid)
    owner = np.full(grid.num_snippets, -1, dtype=np.int64)
    best = np.full(grid.num_snippets, -np.inf)
    order = sorted(
        range(len(proposals)),
        key=lambda i: (
            -proposals[i].score,
            proposals[i].interval.duration_s,
            proposals[i].interval.start_s,
            proposals[i].class_id,
        ),
    )
    for i in order:
        p = proposals[i]
        covered = (centers >= p.interval.start_s) & (centers < p.interval.end_s)
        take = covered & (p.score > best)
        owner[take] = i
        best[take] = p.score
    out: list[PseudoProposal] = []
    dur = grid.snippet_duration_s
    t = 0
    while t < grid.num_snippets:
        if owner[t] < 0:
            t += 1
            continue
        start = t
        while t + 1 < grid.num_snippets and owner[t + 1] == owner[start]:
            t += 1
        p = proposals[owner[start]]
        out.append(
            PseudoProposal(
                Interval(start * dur, (t + 1) * dur), p.class_id, max(p.score, 0.0)
            )
        )
        t += 1
    return out


def _fuse_gauss(
    proposals: Sequence[Proposal], group_tiou: float
) -> list[PseudoProposal]:
    """Group same-class proposals around the current top score and average
    boundaries weighted by score."""
    if not 0.0 < group_tiou < 1.0:
        raise ValueError("gauss grouping tiou must lie in (0, 1)")
    remaining = [p for p in proposals if p.score > 0.0]
    remaining.sort(key=lambda p: (-p.score, p.interval.start_s, p.interval.end_s))
    out: list[PseudoProposal] = []
    while remaining:
        top = remaining[0]
        in_group = [
            p.class_id == top.class_id and tiou(p.interval, top.interval) >= group_tiou
            for p in remaining
        ]
        group = [p for p, g in zip(remaining, in_group) if g]
        total = sum(p.score for p in group)
        start = sum(p.interval.start_s * p.score for p in group) / total
        end = sum(p.interval.end_s * p.score for p in group) / total
        out.append(PseudoProposal(Interval(start, end), top.class_id, top.score))
        remaining = [p for p, g in zip(remaining, in_group) if not g]
    return out


def fuse_baseline(
    strategy: FusionStrategy | str,
    proposals: Sequence[Proposal],
    grid: TimeGrid,
    top_k: int = 4,
    score_threshold: float = 0.2,
    group_tiou: float = 0.5,
) -> list[PseudoProposal]:
    """Apply one of the five baseline strategies to a single video's proposals."""
    if isinstance(strategy, str):
        try:
            strategy = FusionStrategy(strategy.lower())
        except ValueError:
            raise ValueError(f"unknown fusion strategy: {strategy!r}") from None
    if strategy is FusionStrategy.HARD:
        return _fuse_hard(proposals, grid)
    if strategy is FusionStrategy.SOFT:
        return [_to_pseudo(p) for p in proposals]
    if strategy is FusionStrategy.TOPK:
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        ranked = sorted(
            proposals, key=lambda p: (-p.score, p.interval.start_s, p.interval.end_s)
        )
        return [_to_pseudo(p) for p in ranked[:top_k]]
    if strategy is FusionStrategy.THRESHOLD:
        return [_to_pseudo(p) for p in proposals if p.score >= score_threshold]
    if strategy is FusionStrategy.GAUSS:
        return _fuse_gauss(proposals, group_tiou)
    raise ValueError(f"unknown fusion strategy: {strategy!r}")


def generate_pseudo_labels(
    strategy: str,
    proposals: Sequence[Proposal],
    grid: TimeGrid,
    min_duration_s: float = 0.0,
    top_k: int = 4,
    score_threshold: float = 0.2,
    group_tiou: float = 0.5,
) -> list[PseudoProposal]:
    """Dispatch by name over wavelet fusion ("ricker") and the baselines."""
    if strategy.lower() == "ricker":
        wavelet = fuse_ricker(proposals, grid)
        return segments_from_wavelet(wavelet, min_duration_s=min_duration_s)
    return fuse_baseline(
        strategy,
        proposals,
        grid,
        top_k=top_k,
        score_threshold=score_threshold,
        group_tiou=group_tiou,
    )
