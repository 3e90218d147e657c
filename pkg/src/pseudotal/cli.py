"""Command-line pipeline over JSON-lines files.

Subcommands: extract, fuse, mask, targets, losses, eval, simulate,
benchmark. Every output file is a pure function of its inputs and the
config: floats are written at 6 significant digits, rows are ordered by
video_id, and worker-pool parallelism (--jobs) never changes bytes.
Exit codes: 0 success, 2 missing/malformed input, 3 domain-constraint
violation.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import TOOL_VERSION, PipelineConfig
from .core import Interval, Proposal, PseudoProposal, SnippetPredictions, TimeGrid
from .evaluation import GroundTruthSet, map_table
from .fusion import fuse_ricker, generate_pseudo_labels
from .mask import MaskParams, SnippetMask, decay_schedule, mask_for_proposal, union_masks
from .sim import RNG_NAME, SimConfig, corrupt_predictions, gen_corpus, run_benchmark
from .targets import (
    AnchorPredictions,
    AnchorTargets,
    PyramidConfig,
    att_loss,
    build_targets,
    cls_loss,
    reg_loss,
    total_loss,
)
from .weak_branch import VideoLabel, compute_sps, weak_proposals

__all__ = ["main"]


class SchemaError(Exception):
    """Input file missing, unparsable, or shaped wrong."""


def _round6(x: float) -> float:
    return float(f"{float(x):.6g}")


def _jsonable(value):
    """Recursively convert to JSON-ready types with 6-significant-digit floats."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _round6(value)
    return value


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(", ", ": "))


def _read_lines(path: str) -> list[dict]:
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"missing file: {path}")
    rows = []
    with p.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise SchemaError(f"{path}:{lineno}: expected a JSON object")
            if "_header" in obj:
                continue
            rows.append(obj)
    return rows


def _require(row: dict, keys: Sequence[str], path: str) -> None:
    missing = [k for k in keys if k not in row]
    if missing:
        raise SchemaError(f"{path}: row missing keys {missing}")


def _header(cfg: PipelineConfig) -> dict:
    return {"_header": {"config_hash": cfg.config_hash(), "tool_version": TOOL_VERSION}}


def _write_jsonl(path: str, cfg: PipelineConfig, rows: Iterable[dict]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(_dump(_header(cfg)) + "\n")
        for row in rows:
            fh.write(_dump(row) + "\n")


def _write_report(path: str, cfg: PipelineConfig, metrics: dict, timings) -> None:
    report = {
        "config_hash": cfg.config_hash(),
        "tool_version": TOOL_VERSION,
        "metrics": metrics,
        "timings_ms": timings,
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(_dump(report) + "\n")


# ---------------------------------------------------------------- input parsing


def _parse_sp_file(path: str) -> dict[str, tuple[TimeGrid, SnippetPredictions]]:
    out: dict[str, tuple[TimeGrid, SnippetPredictions]] = {}
    for row in _read_lines(path):
        _require(
            row,
            ("video_id", "num_snippets", "snippet_duration_s", "attention", "class_scores"),
            path,
        )
        att = np.asarray(row["attention"], dtype=np.float64)
        cls = np.asarray(row["class_scores"], dtype=np.float64)
        if cls.ndim != 2 or cls.shape[0] != int(row["num_snippets"]):
            raise SchemaError(f"{path}: class_scores shape disagrees with num_snippets")
        # guard against the 6-digit file rounding drifting row sums
        sums = cls.sum(axis=1, keepdims=True)
        if np.any(sums <= 0):
            raise SchemaError(f"{path}: class_scores rows must have positive sums")
        cls = cls / sums
        grid = TimeGrid(int(row["num_snippets"]), float(row["snippet_duration_s"]), cls.shape[1] - 1)
        out[str(row["video_id"])] = (grid, SnippetPredictions(att, cls))
    return out


def _parse_grid_file(path: str) -> dict[str, TimeGrid]:
    """Grid metadata from an SP-shaped file or a slim grid file."""
    out: dict[str, TimeGrid] = {}
    for row in _read_lines(path):
        _require(row, ("video_id", "num_snippets", "snippet_duration_s"), path)
        if "class_scores" in row:
            c = len(row["class_scores"][0]) - 1
        elif "class_count" in row:
            c = int(row["class_count"])
        else:
            raise SchemaError(f"{path}: grid rows need class_scores or class_count")
        out[str(row["video_id"])] = TimeGrid(
            int(row["num_snippets"]), float(row["snippet_duration_s"]), c
        )
    return out


def _parse_segments(path: str, with_score: bool):
    """Proposal or GT rows grouped by video id, in file order."""
    out: dict[str, list] = {}
    keys = ("video_id", "start_s", "end_s", "class_id") + (("score",) if with_score else ())
    for row in _read_lines(path):
        _require(row, keys, path)
        iv = Interval(float(row["start_s"]), float(row["end_s"]))
        if with_score:
            item = Proposal(iv, float(row["score"]), int(row["class_id"]))
        else:
            item = (iv, int(row["class_id"]))
        out.setdefault(str(row["video_id"]), []).append(item)
    return out


def _parse_mask_file(path: str) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    for row in _read_lines(path):
        _require(row, ("video_id", "bits"), path)
        bits: list[int] = []
        for pair in row["bits"]:
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"{path}: bits must be [value, count] pairs")
            value, count = pair
            if value not in (0, 1) or int(count) < 1:
                raise SchemaError(f"{path}: bits pairs need value in 0/1 and count >= 1")
            bits.extend([int(value)] * int(count))
        out[str(row["video_id"])] = np.asarray(bits, dtype=np.uint8)
    return out


def _rle(bits: np.ndarray) -> list[list[int]]:
    pairs: list[list[int]] = []
    for b in bits.tolist():
        if pairs and pairs[-1][0] == b:
            pairs[-1][1] += 1
        else:
            pairs.append([int(b), 1])
    return pairs


def _parse_targets_file(path: str) -> dict[str, AnchorTargets]:
    out: dict[str, AnchorTargets] = {}
    for row in _read_lines(path):
        _require(
            row,
            (
                "video_id",
                "num_snippets",
                "snippet_duration_s",
                "class_count",
                "level_sizes",
                "class_label",
                "reg_left",
                "reg_right",
                "iou_weight",
                "mask_bit",
            ),
            path,
        )
        grid = TimeGrid(
            int(row["num_snippets"]), float(row["snippet_duration_s"]), int(row["class_count"])
        )
        out[str(row["video_id"])] = AnchorTargets(
            grid,
            tuple(int(s) for s in row["level_sizes"]),
            np.asarray(row["class_label"], dtype=np.int64),
            np.asarray(row["reg_left"], dtype=np.float64),
            np.asarray(row["reg_right"], dtype=np.float64),
            np.asarray(row["iou_weight"], dtype=np.float64),
            np.asarray(row["mask_bit"], dtype=np.uint8),
        )
    return out


def _parse_anchor_predictions(path: str) -> dict[str, AnchorPredictions]:
    out: dict[str, AnchorPredictions] = {}
    for row in _read_lines(path):
        _require(row, ("video_id", "class_probs", "reg_left", "reg_right"), path)
        probs = np.asarray(row["class_probs"], dtype=np.float64)
        sums = probs.sum(axis=1, keepdims=True)
        if np.any(sums <= 0):
            raise SchemaError(f"{path}: class_probs rows must have positive sums")
        probs = probs / sums
        snippet = row.get("snippet_probs")
        out[str(row["video_id"])] = AnchorPredictions(
            probs,
            np.asarray(row["reg_left"], dtype=np.float64),
            np.asarray(row["reg_right"], dtype=np.float64),
            None if snippet is None else np.asarray(snippet, dtype=np.float64),
        )
    return out


def _labels_from_gt(gt: dict[str, list], class_count: int) -> dict[str, VideoLabel]:
    return {
        vid: VideoLabel.from_classes(sorted({c for _, c in items}), class_count)
        for vid, items in gt.items()
    }


def _segment_row(vid: str, iv: Interval, class_id: int, score: float | None) -> dict:
    row = {
        "video_id": vid,
        "start_s": iv.start_s,
        "end_s": iv.end_s,
        "class_id": int(class_id),
    }
    if score is not None:
        row["score"] = score
    return row


def _scheduled_mask_params(cfg: PipelineConfig, epoch: int | None) -> MaskParams:
    if epoch is None:
        return MaskParams(cfg.alpha, cfg.beta)
    return decay_schedule(
        epoch, cfg.warmup_epochs, cfg.total_epochs, MaskParams(cfg.alpha, cfg.beta)
    )


def _over_videos(
    video_ids: Sequence[str], fn: Callable[[str], tuple[str, object]], jobs: int
) -> list[tuple[str, object]]:
    """Apply fn per video, in parallel when jobs > 1; results sorted by id."""
    ordered = sorted(video_ids)
    if jobs <= 1:
        results = [fn(vid) for vid in ordered]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(fn, ordered))
    return sorted(results, key=lambda pair: pair[0])


# ---------------------------------------------------------------- subcommands


def _cmd_extract(args, cfg: PipelineConfig) -> int:
    sps = _parse_sp_file(_one_input(args, "an SP file"))
    gt = _parse_segments(_need(args.gt, "--gt"), with_score=False)
    missing = sorted(set(sps) - set(gt))
    if missing:
        raise ValueError(f"no ground-truth labels for videos: {missing}")

    def work(vid: str):
        grid, preds = sps[vid]
        label = VideoLabel.from_classes(
            sorted({c for _, c in gt[vid]}), grid.class_count
        )
        proposals = weak_proposals(
            preds,
            grid,
            label,
            cfg.thresholds,
            oic_inflation=cfg.oic_inflation,
            sigma_nms=cfg.sigma_nms,
            min_score=cfg.min_score,
            extract_on=cfg.extract_on,
        )
        return vid, proposals

    rows = []
    for vid, proposals in _over_videos(list(sps), work, args.jobs):
        rows.extend(
            _segment_row(vid, p.interval, p.class_id, p.score) for p in proposals
        )
    _write_jsonl(args.output, cfg, rows)
    return 0


def _cmd_fuse(args, cfg: PipelineConfig) -> int:
    paths = _inputs(args, 2, "proposals file and grid source")
    proposals = _parse_segments(paths[0], with_score=True)
    grids = _parse_grid_file(paths[1])
    missing = sorted(set(proposals) - set(grids))
    if missing:
        raise ValueError(f"no grid metadata for videos: {missing}")

    def work(vid: str):
        grid = grids[vid]
        pseudos = generate_pseudo_labels(
            args.strategy,
            proposals[vid],
            grid,
            min_duration_s=cfg.min_duration_snippets * grid.snippet_duration_s,
        )
        return vid, pseudos

    results = _over_videos(list(proposals), work, args.jobs)
    rows = []
    for vid, pseudos in results:
        rows.extend(
            _segment_row(vid, p.interval, p.class_id, p.confidence) for p in pseudos
        )
    _write_jsonl(args.output, cfg, rows)

    if args.wavelet_csv:
        if len(proposals) != 1:
            raise ValueError("wavelet CSV requires exactly one video in the input")
        vid = next(iter(proposals))
        grid = grids[vid]
        wavelet = fuse_ricker(proposals[vid], grid)
        with Path(args.wavelet_csv).open("w", encoding="utf-8") as fh:
            fh.write(
                f"# config_hash={cfg.config_hash()} tool_version={TOOL_VERSION}\n"
            )
            fh.write("t," + ",".join(f"class_{c}" for c in range(1, grid.class_count + 1)) + "\n")
            centers = (np.arange(grid.num_snippets) + 0.5) * grid.snippet_duration_s
            for i, t in enumerate(centers):
                cells = ",".join(f"{wavelet.values[i, c]:.6g}" for c in range(grid.class_count))
                fh.write(f"{t:.6g},{cells}\n")
    return 0


def _cmd_mask(args, cfg: PipelineConfig) -> int:
    paths = _inputs(args, 2, "pseudo file and grid source")
    pseudos = _parse_segments(paths[0], with_score=True)
    grids = _parse_grid_file(paths[1])
    missing = sorted(set(pseudos) - set(grids))
    if missing:
        raise ValueError(f"no grid metadata for videos: {missing}")
    params = _scheduled_mask_params(cfg, args.epoch)

    def work(vid: str):
        grid = grids[vid]
        masks = [
            mask_for_proposal(
                PseudoProposal(p.interval, p.class_id, max(p.score, 0.0)), params, grid
            )
            for p in pseudos[vid]
        ]
        return vid, union_masks(masks, grid)

    rows = [
        {"video_id": vid, "bits": _rle(mask.bits)}
        for vid, mask in _over_videos(list(pseudos), work, args.jobs)
    ]
    _write_jsonl(args.output, cfg, rows)
    return 0


def _cmd_targets(args, cfg: PipelineConfig) -> int:
    paths = _inputs(args, 2, "pseudo file, grid source, optional mask file", allow_more=True)
    pseudos = _parse_segments(paths[0], with_score=True)
    grids = _parse_grid_file(paths[1])
    mask_bits = _parse_mask_file(paths[2]) if len(paths) > 2 else None
    missing = sorted(set(pseudos) - set(grids))
    if missing:
        raise ValueError(f"no grid metadata for videos: {missing}")
    params = _scheduled_mask_params(cfg, args.epoch)
    pyramid = PyramidConfig(num_levels=cfg.num_levels)

    def work(vid: str):
        grid = grids[vid]
        plist = [
            PseudoProposal(p.interval, p.class_id, max(p.score, 0.0))
            for p in pseudos[vid]
        ]
        base = None
        if mask_bits is not None:
            if vid not in mask_bits:
                raise ValueError(f"no mask bits for video {vid}")
            base = SnippetMask(mask_bits[vid], grid)
        return vid, build_targets(plist, params, pyramid, grid, base_mask=base)

    rows = []
    for vid, tgt in _over_videos(list(pseudos), work, args.jobs):
        rows.append(
            {
                "video_id": vid,
                "num_snippets": tgt.grid.num_snippets,
                "snippet_duration_s": tgt.grid.snippet_duration_s,
                "class_count": tgt.grid.class_count,
                "level_sizes": list(tgt.level_sizes),
                "class_label": tgt.class_label,
                "reg_left": tgt.reg_left,
                "reg_right": tgt.reg_right,
                "iou_weight": tgt.iou_weight,
                "mask_bit": tgt.mask_bit,
            }
        )
    _write_jsonl(args.output, cfg, rows)
    return 0


def _cmd_losses(args, cfg: PipelineConfig) -> int:
    paths = _inputs(args, 2, "anchor predictions and targets", allow_more=True)
    preds = _parse_anchor_predictions(paths[0])
    targets = _parse_targets_file(paths[1])
    missing = sorted(set(preds) ^ set(targets))
    if missing:
        raise ValueError(f"predictions and targets disagree on videos: {missing}")
    sps_by_vid: dict[str, tuple[TimeGrid, SnippetPredictions]] = {}
    labels: dict[str, VideoLabel] = {}
    if len(paths) > 2:
        sps_by_vid = _parse_sp_file(paths[2])
        gt = _parse_segments(_need(args.gt, "--gt"), with_score=False)
        class_count = next(iter(sps_by_vid.values()))[0].class_count
        labels = _labels_from_gt(gt, class_count)

    def work(vid: str):
        pred, tgt = preds[vid], targets[vid]
        l_cls = cls_loss(pred, tgt, gamma=cfg.gamma_focal)
        l_reg = reg_loss(pred, tgt)
        l_att = 0.0
        if vid in sps_by_vid and pred.snippet_probs is not None:
            grid, sp = sps_by_vid[vid]
            if vid not in labels:
                raise ValueError(f"no ground-truth labels for video {vid}")
            z = compute_sps(sp.attention, sp.class_scores)
            l_att = att_loss(
                pred.snippet_probs, z, cfg.tau, labels[vid], gamma=cfg.gamma_focal
            )
        has_pos = bool(((tgt.mask_bit == 1) & (tgt.class_label > 0)).any())
        entry = {
            "cls": l_cls,
            "reg": l_reg,
            "att": l_att,
            "total": total_loss(l_reg, l_cls, l_att, cfg.lambda_att),
            "empty_positives": not has_pos,
        }
        return vid, entry

    results = _over_videos(list(preds), work, args.jobs)
    per_video = {vid: entry for vid, entry in results}
    n = len(per_video)
    mean = {
        key: sum(entry[key] for entry in per_video.values()) / n
        for key in ("cls", "reg", "att", "total")
    }
    mean["empty_positives"] = sum(
        1 for entry in per_video.values() if entry["empty_positives"]
    )
    _write_report(
        args.output, cfg, {"per_video": per_video, "mean": mean}, _timings(args, None)
    )
    return 0


def _cmd_eval(args, cfg: PipelineConfig) -> int:
    preds = _parse_segments(_one_input(args, "a predictions file"), with_score=True)
    gt_rows = _parse_segments(_need(args.gt, "--gt"), with_score=False)
    gt = GroundTruthSet({vid: tuple(items) for vid, items in gt_rows.items()})
    t0 = time.perf_counter()
    report = map_table(preds, gt, cfg.eval_tious)
    elapsed = (time.perf_counter() - t0) * 1000.0
    _write_report(args.output, cfg, report.to_dict(), _timings(args, {"eval": elapsed}))
    return 0


def _sim_config(args, raw_sim: dict) -> SimConfig:
    known = {f.name for f in dataclasses.fields(SimConfig)}
    unknown = set(raw_sim) - known
    if unknown:
        raise SchemaError(f"unknown sim config keys: {sorted(unknown)}")
    kwargs = dict(raw_sim)
    for name in ("snippets_per_video", "actions_per_video", "duration_range_s"):
        if name in kwargs:
            kwargs[name] = tuple(kwargs[name])
    if args.seed is not None:
        kwargs["seed"] = args.seed
    return SimConfig(**kwargs)


def _cmd_simulate(args, cfg: PipelineConfig, raw_sim: dict) -> int:
    sim_cfg = _sim_config(args, raw_sim)
    layout = gen_corpus(sim_cfg)
    predictions = corrupt_predictions(layout.ground_truth, layout.grids, sim_cfg)
    sp_rows = []
    for vid in layout.video_ids():
        grid = layout.grids[vid]
        preds = predictions[vid]
        sp_rows.append(
            {
                "video_id": vid,
                "num_snippets": grid.num_snippets,
                "snippet_duration_s": grid.snippet_duration_s,
                "attention": preds.attention,
                "class_scores": preds.class_scores,
            }
        )
    _write_jsonl(args.output, cfg, sp_rows)
    if args.gt:
        gt_rows = []
        for vid in layout.video_ids():
            gt_rows.extend(
                _segment_row(vid, iv, class_id, None)
                for iv, class_id in layout.ground_truth.segments[vid]
            )
        _write_jsonl(args.gt, cfg, gt_rows)
    return 0


def _cmd_benchmark(args, cfg: PipelineConfig, raw_sim: dict) -> int:
    sim_cfg = _sim_config(args, raw_sim)
    strategies = args.strategy or ["ricker", "soft", "hard", "topk", "threshold", "gauss"]
    result = run_benchmark(sim_cfg, strategies, cfg)
    metrics = {
        "rng": RNG_NAME,
        "sim": dataclasses.asdict(sim_cfg),
        "strategies": {
            name: result.reports[name].to_dict() for name in sorted(result.reports)
        },
    }
    _write_report(args.output, cfg, metrics, _timings(args, dict(result.timings_ms)))
    return 0


# ---------------------------------------------------------------- plumbing


def _timings(args, measured: dict | None):
    # reports are byte-reproducible by default; timings only on request
    if getattr(args, "timings", False) and measured is not None:
        return {k: _round6(v) for k, v in sorted(measured.items())}
    return None


def _need(value: str | None, flag: str) -> str:
    if not value:
        raise SchemaError(f"this subcommand requires {flag}")
    return value


def _inputs(args, count: int, what: str, allow_more: bool = False) -> list[str]:
    paths = args.input or []
    if len(paths) < count or (not allow_more and len(paths) > count):
        raise SchemaError(
            f"this subcommand takes {'at least ' if allow_more else ''}{count} "
            f"--input paths ({what}); got {len(paths)}"
        )
    return paths


def _one_input(args, what: str) -> str:
    return _inputs(args, 1, what)[0]


def _load_config(path: str | None) -> tuple[PipelineConfig, dict]:
    if path is None:
        return PipelineConfig(), {}
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"missing file: {path}")
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: config must be a JSON object")
    raw_sim = raw.pop("sim", {})
    if not isinstance(raw_sim, dict):
        raise SchemaError(f"{path}: 'sim' must be a JSON object")
    try:
        return PipelineConfig.from_dict(raw), raw_sim
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudotal",
        description="Pseudo-label pipeline for temporal action localization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "extract": "SP file -> scored proposals (needs --gt for video labels)",
        "fuse": "proposals + grid source -> pseudo proposals",
        "mask": "pseudos + grid source -> uncertainty mask file",
        "targets": "pseudos + grid source [+ mask file] -> anchor target file",
        "losses": "anchor predictions + targets [+ SP file] -> loss report",
        "eval": "predictions (needs --gt) -> mAP report",
        "simulate": "config -> synthetic SP corpus (and GT via --gt)",
        "benchmark": "config -> per-strategy pseudo-label quality report",
    }
    for name, help_text in specs.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="pipeline config JSON (optional 'sim' section)")
        sp.add_argument(
            "--input",
            action="append",
            help="input file; repeat for subcommands taking several (see FORMATS.md)",
        )
        sp.add_argument("--gt", help="ground-truth segments file (read, or written by simulate)")
        sp.add_argument("--output", required=True, help="output file path")
        sp.add_argument("--strategy", action="append", default=None,
                        help="fusion strategy; repeatable for benchmark")
        sp.add_argument("--epoch", type=int, default=None,
                        help="training epoch for mask-band scheduling")
        sp.add_argument("--seed", type=int, default=None, help="override the sim seed")
        sp.add_argument("--jobs", type=int, default=1, help="worker threads per video")
        sp.add_argument("--timings", action="store_true",
                        help="include wall-clock timings in reports (breaks byte reproducibility)")
        sp.add_argument("--wavelet-csv", default=None,
                        help="fuse only: also write the fused wavelet as CSV (single video)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        cfg, raw_sim = _load_config(args.config)
        if args.command == "extract":
            return _cmd_extract(args, cfg)
        if args.command == "fuse":
            args.strategy = (args.strategy or ["ricker"])[0]
            return _cmd_fuse(args, cfg)
        if args.command == "mask":
            return _cmd_mask(args, cfg)
        if args.command == "targets":
            return _cmd_targets(args, cfg)
        if args.command == "losses":
            return _cmd_losses(args, cfg)
        if args.command == "eval":
            return _cmd_eval(args, cfg)
        if args.command == "simulate":
            return _cmd_simulate(args, cfg, raw_sim)
        if args.command == "benchmark":
            return _cmd_benchmark(args, cfg, raw_sim)
        parser.error(f"unknown command {args.command}")
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
