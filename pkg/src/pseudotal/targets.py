"""Anchor-level supervision for the regression branch.

Pseudo proposals are routed to pyramid levels by duration, rasterized
into per-anchor class labels and boundary offsets, and combined with the
uncertainty mask. The classification, regression, and snippet-attention
losses are deterministic pure functions of (predictions, targets); no
gradients or parameter updates live here. `refine` folds model outputs
back into the pseudo-label set through the wavelet fusion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Interval, Proposal, PseudoProposal, TimeGrid
from .fusion import fuse_ricker, segments_from_wavelet
from .mask import MaskParams, SnippetMask, mask_for_proposal, union_masks
from .weak_branch import VideoLabel

__all__ = [
    "PyramidConfig",
    "AnchorTargets",
    "AnchorPredictions",
    "assign_level",
    "build_targets",
    "focal_loss",
    "cls_loss",
    "reg_loss",
    "att_loss",
    "total_loss",
    "update_iou_weights",
    "refine",
]

PROB_EPS = 1e-12


def _default_ranges(num_levels: int) -> tuple[tuple[float, float], ...]:
    # duration ladder 0,4,8,16,32,... in snippets, open-ended top
    bounds = [0.0] + [4.0 * 2**i for i in range(num_levels - 1)] + [math.inf]
    return tuple((bounds[i], bounds[i + 1]) for i in range(num_levels))


@dataclass(frozen=True)
class PyramidConfig:
    """Multi-scale anchor layout: stride doubles per level, and each level
    owns a half-open duration range (in snippets)."""

    num_levels: int = 6
    base_stride_snippets: int = 1
    regression_ranges: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.num_levels < 1:
            raise ValueError("num_levels must be >= 1")
        if self.base_stride_snippets < 1:
            raise ValueError("base_stride_snippets must be >= 1")
        ranges = self.regression_ranges or _default_ranges(self.num_levels)
        ranges = tuple((float(lo), float(hi)) for lo, hi in ranges)
        if len(ranges) != self.num_levels:
            raise ValueError("one regression range required per level")
        if ranges[0][0] != 0.0 or not math.isinf(ranges[-1][1]):
            raise ValueError("regression ranges must start at 0 and end open-ended")
        for (lo, hi), (lo2, _) in zip(ranges, ranges[1:]):
            if hi != lo2 or lo >= hi:
                raise ValueError("regression ranges must be ascending and contiguous")
        object.__setattr__(self, "regression_ranges", ranges)

    def stride(self, level: int) -> int:
        return self.base_stride_snippets * 2**level

    def level_sizes(self, grid: TimeGrid) -> tuple[int, ...]:
        return tuple(
            math.ceil(grid.num_snippets / self.stride(level))
            for level in range(self.num_levels)
        )

    def total_anchors(self, grid: TimeGrid) -> int:
        return sum(self.level_sizes(grid))


@dataclass(frozen=True, eq=False)
class AnchorTargets:
    """Flat per-anchor supervision across all pyramid levels.

    class_label: 0 for background, 1..C otherwise.
    reg_left/reg_right: boundary distances in stride units at the anchor's level.
    iou_weight: classification weight (1 for fresh positives, refreshed
        from decoded predictions via `update_iou_weights`); 0 on background.
    mask_bit: 1 where the uncertainty mask allows training.
    """

    grid: TimeGrid
    level_sizes: tuple[int, ...]
    class_label: np.ndarray
    reg_left: np.ndarray
    reg_right: np.ndarray
    iou_weight: np.ndarray
    mask_bit: np.ndarray

    def __post_init__(self) -> None:
        n = sum(self.level_sizes)
        arrays = {
            "class_label": np.asarray(self.class_label, dtype=np.int64),
            "reg_left": np.asarray(self.reg_left, dtype=np.float64),
            "reg_right": np.asarray(self.reg_right, dtype=np.float64),
            "iou_weight": np.asarray(self.iou_weight, dtype=np.float64),
            "mask_bit": np.asarray(self.mask_bit, dtype=np.uint8),
        }
        for name, arr in arrays.items():
            if arr.shape != (n,):
                raise ValueError(f"{name} must have one entry per anchor")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        pos = arrays["class_label"] > 0
        if np.any((arrays["reg_left"][pos] + arrays["reg_right"][pos]) <= 0):
            raise ValueError("positive anchors need reg_left + reg_right > 0")
        if np.any(arrays["iou_weight"][~pos] != 0):
            raise ValueError("background anchors must carry iou_weight 0")

    @property
    def num_anchors(self) -> int:
        return int(self.class_label.shape[0])

    def anchor_strides(self) -> np.ndarray:
        """Stride (in snippets) of each anchor, level by level."""
        parts = [
            np.full(size, 2**level, dtype=np.float64)
            for level, size in enumerate(self.level_sizes)
        ]
        return np.concatenate(parts) if parts else np.zeros(0)

    def anchor_times(self) -> np.ndarray:
        """Anchor center time in seconds, level by level."""
        dur = self.grid.snippet_duration_s
        parts = [
            (np.arange(size, dtype=np.float64) + 0.5) * (2**level) * dur
            for level, size in enumerate(self.level_sizes)
        ]
        return np.concatenate(parts) if parts else np.zeros(0)

    def decode_intervals(self, reg_left: np.ndarray, reg_right: np.ndarray) -> np.ndarray:
        """Decode per-anchor (start, end) seconds from stride-unit offsets."""
        scale = self.anchor_strides() * self.grid.snippet_duration_s
        times = self.anchor_times()
        return np.stack([times - reg_left * scale, times + reg_right * scale], axis=1)


@dataclass(frozen=True, eq=False)
class AnchorPredictions:
    """Stand-in for the network heads: per-anchor class distribution and
    boundary offsets, plus optional per-snippet class rows for the
    attention loss."""

    class_probs: np.ndarray
    reg_left: np.ndarray
    reg_right: np.ndarray
    snippet_probs: np.ndarray | None = None

    def __post_init__(self) -> None:
        probs = np.asarray(self.class_probs, dtype=np.float64)
        left = np.asarray(self.reg_left, dtype=np.float64)
        right = np.asarray(self.reg_right, dtype=np.float64)
        if probs.ndim != 2:
            raise ValueError("class_probs must be (num_anchors, C+1)")
        if left.shape != (probs.shape[0],) or right.shape != (probs.shape[0],):
            raise ValueError("reg offsets must match the anchor count")
        if np.any(np.abs(probs.sum(axis=1) - 1.0) > 1e-6):
            raise ValueError("class_probs rows must sum to 1 within 1e-6")
        if np.any(left < 0) or np.any(right < 0):
            raise ValueError("reg offsets must be nonnegative")
        for name, arr in (("class_probs", probs), ("reg_left", left), ("reg_right", right)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.snippet_probs is not None:
            sp = np.asarray(self.snippet_probs, dtype=np.float64)
            sp.setflags(write=False)
            object.__setattr__(self, "snippet_probs", sp)


def assign_level(p: PseudoProposal, cfg: PyramidConfig, grid: TimeGrid) -> int:
    """Pyramid level whose duration range contains the proposal."""
    duration_snippets = p.interval.duration_s / grid.snippet_duration_s
    for level, (lo, hi) in enumerate(cfg.regression_ranges):
        if lo <= duration_snippets < hi:
            return level
    return cfg.num_levels - 1


def build_targets(
    pseudos: Sequence[PseudoProposal],
    mask_params: MaskParams,
    cfg: PyramidConfig,
    grid: TimeGrid,
    base_mask: SnippetMask | None = None,
) -> AnchorTargets:
    """Rasterize pseudo proposals into per-anchor labels across the pyramid.

    An anchor is positive for the proposal assigned to its level whose
    interval contains the anchor time; when several contain it the
    shortest wins. Regression targets are boundary distances in stride
    units. Mask bits come from the union uncertainty mask on the base
    grid (or `base_mask` when one is supplied), resampled by taking the
    bit of the snippet under each anchor.
    """
    sizes = cfg.level_sizes(grid)
    total = sum(sizes)
    class_label = np.zeros(total, dtype=np.int64)
    reg_left = np.zeros(total, dtype=np.float64)
    reg_right = np.zeros(total, dtype=np.float64)
    iou_weight = np.zeros(total, dtype=np.float64)

    by_level: dict[int, list[PseudoProposal]] = {}
    for p in pseudos:
        by_level.setdefault(assign_level(p, cfg, grid), []).append(p)
    # shortest proposal wins containment ties
    for plist in by_level.values():
        plist.sort(key=lambda p: (p.interval.duration_s, p.interval.start_s))

    dur = grid.snippet_duration_s
    offset = 0
    for level, size in enumerate(sizes):
        stride = cfg.stride(level)
        times = (np.arange(size, dtype=np.float64) + 0.5) * stride * dur
        assigned = np.zeros(size, dtype=bool)
        for p in by_level.get(level, []):
            inside = (times >= p.interval.start_s) & (times < p.interval.end_s)
            take = inside & ~assigned
            idx = np.flatnonzero(take)
            if idx.size == 0:
                continue
            class_label[offset + idx] = p.class_id
            reg_left[offset + idx] = (times[idx] - p.interval.start_s) / (stride * dur)
            reg_right[offset + idx] = (p.interval.end_s - times[idx]) / (stride * dur)
            iou_weight[offset + idx] = 1.0
            assigned |= take
        offset += size

    if base_mask is None:
        base_mask = union_masks(
            [mask_for_proposal(p, mask_params, grid) for p in pseudos], grid
        )
    elif base_mask.grid != grid:
        raise ValueError("base mask grid disagrees with the target grid")
    mask_bit = np.empty(total, dtype=np.uint8)
    offset = 0
    for level, size in enumerate(sizes):
        stride = cfg.stride(level)
        times = (np.arange(size, dtype=np.float64) + 0.5) * stride * dur
        snippet_idx = np.minimum((times / dur).astype(np.int64), grid.num_snippets - 1)
        mask_bit[offset : offset + size] = base_mask.bits[snippet_idx]
        offset += size

    return AnchorTargets(grid, sizes, class_label, reg_left, reg_right, iou_weight, mask_bit)


def focal_loss(p_true: float, gamma: float = 2.0) -> float:
    """Focal term for the probability assigned to the true outcome."""
    p = min(max(p_true, PROB_EPS), 1.0)
    return float(-((1.0 - p) ** gamma) * math.log(p))


def _focal_vec(p_true: np.ndarray, gamma: float) -> np.ndarray:
    p = np.clip(p_true, PROB_EPS, 1.0)
    return -((1.0 - p) ** gamma) * np.log(p)


def cls_loss(pred: AnchorPredictions, tgt: AnchorTargets, gamma: float = 2.0) -> float:
    """IoU-weighted focal classification loss over mask-allowed anchors.

    Positive anchors contribute iou_weight * focal(true-class prob)
    normalized by their count; background anchors contribute
    focal(background prob) normalized by theirs. An empty group
    contributes nothing.
    """
    probs = pred.class_probs
    if probs.shape[0] != tgt.num_anchors:
        raise ValueError("prediction and target anchor counts disagree")
    trainable = tgt.mask_bit == 1
    pos = trainable & (tgt.class_label > 0)
    neg = trainable & (tgt.class_label == 0)
    loss = 0.0
    if pos.any():
        idx = np.flatnonzero(pos)
        p_true = probs[idx, tgt.class_label[idx] - 1]
        loss += float((tgt.iou_weight[idx] * _focal_vec(p_true, gamma)).sum()) / idx.size
    if neg.any():
        idx = np.flatnonzero(neg)
        p_bg = probs[idx, -1]
        loss += float(_focal_vec(p_bg, gamma).sum()) / idx.size
    return loss


def _pair_tiou(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rowwise IoU of two (N, 2) interval arrays; invalid rows score 0."""
    inter = np.minimum(a[:, 1], b[:, 1]) - np.maximum(a[:, 0], b[:, 0])
    len_a = np.clip(a[:, 1] - a[:, 0], 0.0, None)
    len_b = np.clip(b[:, 1] - b[:, 0], 0.0, None)
    inter = np.clip(inter, 0.0, None)
    union = len_a + len_b - inter
    out = np.zeros(a.shape[0])
    ok = union > 0
    out[ok] = inter[ok] / union[ok]
    return out


def reg_loss(pred: AnchorPredictions, tgt: AnchorTargets) -> float:
    """Mean (1 - IoU) between decoded predictions and pseudo intervals over
    mask-allowed positive anchors; 0 when there are none."""
    if pred.class_probs.shape[0] != tgt.num_anchors:
        raise ValueError("prediction and target anchor counts disagree")
    pos = (tgt.mask_bit == 1) & (tgt.class_label > 0)
    if not pos.any():
        return 0.0
    idx = np.flatnonzero(pos)
    decoded = tgt.decode_intervals(pred.reg_left, pred.reg_right)[idx]
    target = tgt.decode_intervals(tgt.reg_left, tgt.reg_right)[idx]
    return float((1.0 - _pair_tiou(decoded, target)).sum()) / idx.size


def att_loss(
    snippet_probs: np.ndarray,
    sps: np.ndarray,
    tau: float,
    video_label: VideoLabel,
    gamma: float = 2.0,
) -> float:
    """Focal loss over confident snippet/class picks.

    A (snippet, class) pair enters when its SP value exceeds tau and the
    class is either background or present in the video label. The loss
    averages focal(predicted prob at that pair) over the picks.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    probs = np.asarray(snippet_probs, dtype=np.float64)
    z = np.asarray(sps, dtype=np.float64)
    if probs.shape != z.shape:
        raise ValueError("snippet_probs and SP matrix shapes disagree")
    c = z.shape[1] - 1
    if video_label.onehot.shape[0] != c:
        raise ValueError("video label length disagrees with SP classes")
    allowed = np.concatenate([video_label.onehot.astype(bool), [True]])
    selected = (z > tau) & allowed[None, :]
    if not selected.any():
        return 0.0
    picks = probs[selected]
    return float(_focal_vec(picks, gamma).sum()) / picks.size


def total_loss(l_reg: float, l_cls: float, l_att: float, lambda_att: float = 0.2) -> float:
    """Combined objective: regression + classification + weighted attention."""
    return l_reg + l_cls + lambda_att * l_att


def update_iou_weights(pred: AnchorPredictions, tgt: AnchorTargets) -> AnchorTargets:
    """Refresh positive-anchor iou_weight from the decoded predictions."""
    pos = tgt.class_label > 0
    decoded = tgt.decode_intervals(pred.reg_left, pred.reg_right)
    target = tgt.decode_intervals(tgt.reg_left, tgt.reg_right)
    weights = np.zeros(tgt.num_anchors)
    weights[pos] = _pair_tiou(decoded[pos], target[pos])
    return AnchorTargets(
        tgt.grid,
        tgt.level_sizes,
        tgt.class_label,
        tgt.reg_left,
        tgt.reg_right,
        weights,
        tgt.mask_bit,
    )


def refine(
    pseudos: Sequence[PseudoProposal],
    model_out: Sequence[Proposal],
    grid: TimeGrid,
    mask_params: MaskParams,
    min_duration_s: float = 0.0,
    model_trust: float = 1.0,
) -> tuple[list[PseudoProposal], SnippetMask]:
    """Fold model proposals back into the pseudo labels and refresh the mask.

    The existing pseudo proposals (weighted by their confidence) and the
    model outputs (scores scaled by `model_trust`) are fused together
    through the wavelet space; the union uncertainty mask is rebuilt from
    the result with the currently scheduled mask ratios.
    """
    combined: list[Proposal] = [p.as_proposal() for p in pseudos]
    combined.extend(
        Proposal(p.interval, p.score * model_trust, p.class_id) for p in model_out
    )
    wavelet = fuse_ricker(combined, grid)
    refreshed = segments_from_wavelet(wavelet, min_duration_s=min_duration_s)
    new_mask = union_masks(
        [mask_for_proposal(p, mask_params, grid) for p in refreshed], grid
    )
    return refreshed, new_mask
