"""Seeded synthetic corpus standing in for a trained weak branch.

Videos are laid out as non-overlapping actions on a snippet grid with
video-level labels; snippet predictions are then rendered as ideal
attention/class rows and corrupted with boundary jitter, low-frequency
attention noise, and false-positive segments. Every byte of output is a
pure function of the config: video v draws from the PCG64 substream
seeded with SeedSequence((seed, stage, v)), stage 0 for layout and 1 for
corruption, so per-video work can run on any number of workers without
changing results.
"""
from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .config import PipelineConfig
from .core import Interval, PseudoProposal, SnippetPredictions, TimeGrid
from .evaluation import EvalReport, GroundTruthSet, pseudo_quality
from .fusion import generate_pseudo_labels
from .weak_branch import VideoLabel, weak_proposals

__all__ = [
    "SimConfig",
    "CorpusLayout",
    "BenchmarkResult",
    "gen_corpus",
    "corrupt_predictions",
    "pipeline_pseudo_labels",
    "run_benchmark",
    "benchmark_many",
    "RNG_NAME",
]

# documented in report headers so corpora are reproducible elsewhere
RNG_NAME = "numpy PCG64, SeedSequence((seed, stage, video_index)), stage 0=layout 1=corruption"

NOISE_SMOOTH_SNIPPETS = 5
FP_AMPLITUDE = (0.5, 1.0)
PLACEMENT_TRIES = 100


@dataclass(frozen=True)
class SimConfig:
    """Corpus shape and corruption rates; `seed` pins every random draw."""

    seed: int = 0
    num_videos: int = 20
    class_count: int = 5
    snippets_per_video: tuple[int, int] = (64, 128)
    actions_per_video: tuple[int, int] = (1, 4)
    duration_range_s: tuple[float, float] = (4.0, 16.0)
    snippet_duration_s: float = 1.0
    min_gap_snippets: int = 4
    attention_noise_std: float = 0.0
    boundary_jitter_frac: float = 0.0
    false_positive_rate: float = 0.0
    score_temperature: float = 0.2

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.num_videos < 1 or self.class_count < 1:
            raise ValueError("need at least one video and one class")
        for name in ("snippets_per_video", "actions_per_video", "duration_range_s"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} range is empty")
        if self.snippets_per_video[0] < 1:
            raise ValueError("videos need at least one snippet")
        if self.actions_per_video[0] < 1:
            raise ValueError("every video needs at least one action")
        if self.duration_range_s[0] <= 0:
            raise ValueError("action durations must be positive")
        if self.snippet_duration_s <= 0:
            raise ValueError("snippet_duration_s must be positive")
        if self.min_gap_snippets < 1:
            raise ValueError("min_gap_snippets must be >= 1")
        for name in ("attention_noise_std", "boundary_jitter_frac", "false_positive_rate"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative")
        if self.score_temperature <= 0:
            raise ValueError("score_temperature must be positive")

    def duration_snippet_range(self) -> tuple[int, int]:
        lo = max(1, math.ceil(self.duration_range_s[0] / self.snippet_duration_s))
        hi = math.floor(self.duration_range_s[1] / self.snippet_duration_s)
        if hi < lo:
            raise ValueError("duration_range_s admits no whole-snippet duration")
        return lo, hi


@dataclass(frozen=True)
class CorpusLayout:
    """Ground truth plus per-video grids and weak labels, keyed by video id."""

    ground_truth: GroundTruthSet
    grids: Mapping[str, TimeGrid]
    labels: Mapping[str, VideoLabel]

    def video_ids(self) -> list[str]:
        return sorted(self.grids)


def _video_rng(seed: int, stage: int, video_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, stage, video_index)))


def _layout_video(cfg: SimConfig, video_index: int) -> tuple[TimeGrid, list[tuple[Interval, int]]]:
    rng = _video_rng(cfg.seed, 0, video_index)
    t_lo, t_hi = cfg.snippets_per_video
    t = int(rng.integers(t_lo, t_hi + 1))
    grid = TimeGrid(t, cfg.snippet_duration_s, cfg.class_count)
    a_lo, a_hi = cfg.actions_per_video
    n_actions = int(rng.integers(a_lo, a_hi + 1))
    d_lo, d_hi = cfg.duration_snippet_range()
    gap = cfg.min_gap_snippets

    durations = None
    for _ in range(PLACEMENT_TRIES):
        cand = rng.integers(d_lo, d_hi + 1, size=n_actions)
        if int(cand.sum()) + gap * (n_actions - 1) <= t:
            durations = cand
            break
    if durations is None:
        raise ValueError(
            f"cannot place {n_actions} actions of {d_lo}..{d_hi} snippets "
            f"in video {video_index} ({t} snippets)"
        )

    # distribute the leftover snippets into n+1 slack gaps (edges included)
    free = t - int(durations.sum()) - gap * (n_actions - 1)
    slack = rng.multinomial(free, np.full(n_actions + 1, 1.0 / (n_actions + 1)))
    segments: list[tuple[Interval, int]] = []
    cursor = int(slack[0])
    for i, d in enumerate(durations):
        start = cursor
        end = start + int(d)
        class_id = int(rng.integers(1, cfg.class_count + 1))
        segments.append(
            (
                Interval(start * cfg.snippet_duration_s, end * cfg.snippet_duration_s),
                class_id,
            )
        )
        cursor = end + gap + int(slack[i + 1])
    return grid, segments


def gen_corpus(cfg: SimConfig) -> CorpusLayout:
    """Sample ground-truth layouts: grids, action segments, video labels.

    Actions never overlap and keep at least `min_gap_snippets` between
    them; boundaries lie on snippet edges. Raises when a video cannot fit
    its sampled actions, naming the video index.
    """
    gt: dict[str, tuple[tuple[Interval, int], ...]] = {}
    grids: dict[str, TimeGrid] = {}
    labels: dict[str, VideoLabel] = {}
    for v in range(cfg.num_videos):
        vid = f"video_{v:04d}"
        grid, segments = _layout_video(cfg, v)
        gt[vid] = tuple(segments)
        grids[vid] = grid
        labels[vid] = VideoLabel.from_classes(
            sorted({c for _, c in segments}), cfg.class_count
        )
    return CorpusLayout(GroundTruthSet(gt), grids, labels)


def _softened_rows(class_ids: np.ndarray, class_count: int, temperature: float) -> np.ndarray:
    """Foreground score rows: temperature-softened one-hot per snippet;
    class id 0 means no action and yields a uniform row."""
    t = class_ids.shape[0]
    logits = np.zeros((t, class_count))
    has_action = class_ids > 0
    logits[has_action, class_ids[has_action] - 1] = 1.0 / temperature
    exp = np.exp(logits - logits.max(axis=1, keepdims=True))
    return exp / exp.sum(axis=1, keepdims=True)


def _smooth_noise(rng: np.random.Generator, t: int, std: float) -> np.ndarray:
    """Low-frequency Gaussian noise: white draws box-filtered over
    NOISE_SMOOTH_SNIPPETS and rescaled back to the requested std. The
    draw happens even at std 0 so corpora differing only in noise level
    share all other randomness."""
    white = rng.normal(0.0, 1.0, t)
    if t >= NOISE_SMOOTH_SNIPPETS > 1:
        kernel = np.full(NOISE_SMOOTH_SNIPPETS, 1.0 / NOISE_SMOOTH_SNIPPETS)
        white = np.convolve(white, kernel, mode="same") * math.sqrt(NOISE_SMOOTH_SNIPPETS)
    return white * std


def _corrupt_video(
    cfg: SimConfig,
    video_index: int,
    grid: TimeGrid,
    segments: Sequence[tuple[Interval, int]],
) -> SnippetPredictions:
    rng = _video_rng(cfg.seed, 1, video_index)
    t = grid.num_snippets
    dur = grid.snippet_duration_s
    centers = (np.arange(t) + 0.5) * dur

    # jitter boundaries in proportion to duration, then clamp to the video
    jittered: list[tuple[float, float, int]] = []
    for iv, class_id in segments:
        d = iv.duration_s
        s = iv.start_s + rng.normal(0.0, cfg.boundary_jitter_frac * d)
        e = iv.end_s + rng.normal(0.0, cfg.boundary_jitter_frac * d)
        s = min(max(s, 0.0), grid.duration_s)
        e = min(max(e, 0.0), grid.duration_s)
        jittered.append((s, e, class_id))

    n_fp = int(rng.poisson(cfg.false_positive_rate))
    d_lo, d_hi = cfg.duration_snippet_range()
    false_segments: list[tuple[float, float, int, float]] = []
    for _ in range(n_fp):
        d = int(rng.integers(d_lo, min(d_hi, t) + 1))
        start = int(rng.integers(0, t - d + 1)) if t > d else 0
        class_id = int(rng.integers(1, cfg.class_count + 1))
        amp = float(rng.uniform(*FP_AMPLITUDE))
        false_segments.append((start * dur, (start + d) * dur, class_id, amp))

    att = np.zeros(t)
    snippet_class = np.zeros(t, dtype=np.int64)
    # false positives first so genuine actions win overlaps
    for s, e, class_id, amp in false_segments:
        inside = (centers >= s) & (centers < e)
        att[inside] = amp
        snippet_class[inside] = class_id
    for s, e, class_id in jittered:
        inside = (centers >= s) & (centers < e)
        att[inside] = 1.0
        snippet_class[inside] = class_id

    att = np.clip(att + _smooth_noise(rng, t, cfg.attention_noise_std), 0.0, 1.0)

    fg = _softened_rows(snippet_class, cfg.class_count, cfg.score_temperature)
    bg = 1.0 - fg.max(axis=1, keepdims=True)
    rows = np.concatenate([fg, bg], axis=1)
    rows /= rows.sum(axis=1, keepdims=True)
    return SnippetPredictions(att, rows)


def corrupt_predictions(
    ground_truth: GroundTruthSet,
    grids: Mapping[str, TimeGrid],
    cfg: SimConfig,
) -> dict[str, SnippetPredictions]:
    """Render noisy snippet predictions for every video.

    Ideal predictions put attention 1 inside actions and 0 outside, with
    class rows softened one-hots over the foreground classes and a
    background channel of 1 minus the foreground peak before row
    renormalization. Corruption jitters boundaries before rasterization,
    adds smoothed Gaussian attention noise, and injects Poisson-count
    false-positive segments of random class.
    """
    out: dict[str, SnippetPredictions] = {}
    for v, vid in enumerate(sorted(grids)):
        out[vid] = _corrupt_video(cfg, v, grids[vid], ground_truth.segments.get(vid, ()))
    return out


def pipeline_pseudo_labels(
    layout: CorpusLayout,
    predictions: Mapping[str, SnippetPredictions],
    strategy: str,
    pipe: PipelineConfig,
) -> dict[str, list[PseudoProposal]]:
    """Full pseudo-label pipeline per video: extract, score, suppress, fuse."""
    pseudos: dict[str, list[PseudoProposal]] = {}
    for vid in layout.video_ids():
        grid = layout.grids[vid]
        proposals = weak_proposals(
            predictions[vid],
            grid,
            layout.labels[vid],
            pipe.thresholds,
            oic_inflation=pipe.oic_inflation,
            sigma_nms=pipe.sigma_nms,
            min_score=pipe.min_score,
            extract_on=pipe.extract_on,
        )
        pseudos[vid] = generate_pseudo_labels(
            strategy,
            proposals,
            grid,
            min_duration_s=pipe.min_duration_snippets * grid.snippet_duration_s,
        )
    return pseudos


@dataclass(frozen=True)
class BenchmarkResult:
    """Per-strategy pseudo-label quality on one simulated corpus."""

    reports: Mapping[str, EvalReport]
    timings_ms: Mapping[str, float]

    def to_dict(self) -> dict:
        return {
            "strategies": {
                name: self.reports[name].to_dict() for name in sorted(self.reports)
            },
            "timings_ms": {k: self.timings_ms[k] for k in sorted(self.timings_ms)},
        }


def run_benchmark(
    cfg: SimConfig,
    strategies: Sequence[str],
    pipe: PipelineConfig | None = None,
) -> BenchmarkResult:
    """Generate one corpus and score every strategy's pseudo labels on it.

    The corpus and the weak-branch proposals are shared across strategies
    so the comparison isolates the fusion step, mirroring a side-by-side
    strategy table.
    """
    if not strategies:
        raise ValueError("at least one strategy required")
    pipe = pipe or PipelineConfig()
    t0 = time.perf_counter()
    layout = gen_corpus(cfg)
    predictions = corrupt_predictions(layout.ground_truth, layout.grids, cfg)
    timings = {"simulate": (time.perf_counter() - t0) * 1000.0}
    reports: dict[str, EvalReport] = {}
    for name in strategies:
        t1 = time.perf_counter()
        pseudos = pipeline_pseudo_labels(layout, predictions, name, pipe)
        reports[name] = pseudo_quality(pseudos, layout.ground_truth, pipe.eval_tious).report
        timings[name] = (time.perf_counter() - t1) * 1000.0
    return BenchmarkResult(reports, timings)


def benchmark_many(
    cfg: SimConfig,
    strategies: Sequence[str],
    seeds: Sequence[int],
    pipe: PipelineConfig | None = None,
) -> dict:
    """Average per-strategy avg mAP over several reseeded corpora."""
    if not seeds:
        raise ValueError("at least one seed required")
    per_seed: dict[int, dict[str, float]] = {}
    for s in seeds:
        result = run_benchmark(dataclasses.replace(cfg, seed=int(s)), strategies, pipe)
        per_seed[int(s)] = {
            name: result.reports[name].average_map for name in strategies
        }
    mean = {
        name: sum(per_seed[s][name] for s in per_seed) / len(per_seed)
        for name in strategies
    }
    return {"per_seed": per_seed, "mean": mean}
