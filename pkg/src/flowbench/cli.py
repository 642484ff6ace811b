"""Command-line entry points: corrupt, evaluate, report.

Exit codes: 0 success, 2 usage error, 3 missing inputs, 4 external-tool
failure, 5 incomplete metric grid.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .core import SEVERITIES, CorruptionKind
from . import datasets, metrics, video

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_INPUTS = 3
EXIT_EXTERNAL_TOOL = 4
EXIT_INCOMPLETE_GRID = 5


@dataclass(frozen=True)
class RunConfig:
    command: str
    benchmark: str | None = None
    split: str | None = None
    kitti_root: str | None = None
    gopro_root: str | None = None
    frames_4x: str | None = None
    out: str | None = None
    seed: int = 0
    kinds: tuple[str, ...] | None = None
    severities: tuple[int, ...] | None = None
    sequences: tuple[str, ...] | None = None
    jobs: int = 1
    encoder: str | None = None
    force: bool = False
    resume: bool = False
    allow_naive_interpolation: bool = False
    pred_dir: str | None = None
    gt_from_manifest: bool = False
    model_id: str = "model"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _parse_kinds(text: str) -> tuple[str, ...]:
    kinds = []
    valid = [k.value for k in CorruptionKind]
    for name in text.split(","):
        name = name.strip()
        if name not in valid:
            raise argparse.ArgumentTypeError(
                f"unknown corruption {name!r}; valid kinds: {', '.join(valid)}"
            )
        kinds.append(name)
    return tuple(kinds)


def _parse_severities(text: str) -> tuple[int, ...]:
    out = []
    for tok in text.split(","):
        value = int(tok)
        if value not in SEVERITIES:
            raise argparse.ArgumentTypeError(f"severity must be in 1..5, got {tok}")
        out.append(value)
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowbench",
        description="Optical-flow corruption robustness benchmark toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    corrupt = sub.add_parser("corrupt", help="materialize a corrupted benchmark")
    corrupt.add_argument("--benchmark", choices=["kitti_fc", "gopro_fc"], required=True)
    corrupt.add_argument("--split", choices=["eval", "train"], default="eval")
    corrupt.add_argument("--kitti-root")
    corrupt.add_argument("--gopro-root")
    corrupt.add_argument("--frames-4x", help="precomputed 960 FPS frame root")
    corrupt.add_argument(
        "--allow-naive-interpolation",
        action="store_true",
        help="permit linear frame blending instead of real 4x interpolation "
        "(non-faithful stand-in, recorded in the manifest)",
    )
    corrupt.add_argument("--out", required=True)
    corrupt.add_argument("--seed", type=int, default=0)
    corrupt.add_argument("--kinds", type=_parse_kinds, help="comma-separated subset")
    corrupt.add_argument("--severities", type=_parse_severities, help="e.g. 1,3,5")
    corrupt.add_argument("--sequences", help="comma-separated GoPro sequence subset")
    corrupt.add_argument("--jobs", type=int, default=1)
    corrupt.add_argument("--encoder", help="path to the external video encoder")
    corrupt.add_argument("--force", action="store_true", help="regenerate everything")
    corrupt.add_argument("--resume", action="store_true", help="continue a partial run")

    evaluate = sub.add_parser("evaluate", help="score predictions against a manifest")
    evaluate.add_argument("--out", required=True, help="benchmark directory (with manifest.json)")
    evaluate.add_argument("--pred-dir", required=True)
    evaluate.add_argument("--model-id", default="model")
    evaluate.add_argument(
        "--gt-from-manifest",
        action="store_true",
        help="require ground-truth paths from the manifest (error if absent)",
    )
    evaluate.add_argument("--report-out", help="where to write report.json (default: pred dir)")

    report = sub.add_parser("report", help="tables, rankings and plot data from reports")
    report.add_argument("reports", nargs="+", help="report.json files")
    report.add_argument("--out", required=True, help="output directory")
    report.add_argument("--rank-key", choices=list(metrics.RANK_KEYS), default="crer")

    return parser


def cmd_corrupt(cfg: RunConfig) -> int:
    out_dir = Path(cfg.out)
    state_path = out_dir / datasets.RUN_STATE_NAME
    if state_path.exists():
        state = json.loads(state_path.read_text())
        if state.get("status") == "in_progress" and not (cfg.resume or cfg.force):
            print(
                f"error: {out_dir} holds a partial run (started by a previous "
                "invocation that did not finish). Pass --resume to continue it "
                "or --force to regenerate from scratch.",
                file=sys.stderr,
            )
            return EXIT_USAGE

    if cfg.benchmark == "kitti_fc":
        if not cfg.kitti_root:
            print("error: --kitti-root is required for kitti_fc", file=sys.stderr)
            return EXIT_USAGE
        manifest = datasets.plan_kitti_fc(cfg.kitti_root, cfg.split, cfg.seed)
    else:
        if not cfg.gopro_root:
            print("error: --gopro-root is required for gopro_fc", file=sys.stderr)
            return EXIT_USAGE
        manifest = datasets.plan_gopro_fc(
            cfg.gopro_root,
            cfg.frames_4x,
            cfg.seed,
            sequences=cfg.sequences or datasets.GOPRO_SEQUENCES,
            allow_naive_interpolation=cfg.allow_naive_interpolation,
        )
    manifest["run_config"] = cfg.to_dict()

    problems = datasets.validate_manifest(manifest)
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_MISSING_INPUTS

    out_dir.mkdir(parents=True, exist_ok=True)
    state_path.write_text(json.dumps({"status": "in_progress", "config": cfg.to_dict()}, indent=2))
    stats = datasets.materialize(
        manifest,
        out_dir,
        kinds=cfg.kinds,
        severities=cfg.severities,
        jobs=cfg.jobs,
        force=cfg.force,
        encoder=cfg.encoder,
    )
    state_path.write_text(json.dumps({"status": "complete", "config": cfg.to_dict()}, indent=2))
    print(f"wrote {stats.written} files, skipped {stats.skipped} up-to-date files")
    print(f"manifest: {out_dir / datasets.MANIFEST_NAME}")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, report_out: str | None = None) -> int:
    out_dir = Path(cfg.out)
    manifest = datasets.load_manifest(out_dir)
    report = metrics.evaluate_manifest(
        manifest,
        out_dir,
        cfg.pred_dir,
        model_id=cfg.model_id,
        require_gt=cfg.gt_from_manifest,
    )
    if report.epe_clean == 0 and report.cre is not None:
        print(
            "note: clean EPE is 0 (predictions equal ground truth); CREr is "
            "undefined and omitted from the report",
            file=sys.stderr,
        )
    report_path = Path(report_out or cfg.pred_dir) / "report.json"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    metrics.save_report(report, report_path)
    (report_path.parent / "report.txt").write_text(metrics.render_table(report))
    print(metrics.render_table(report))
    print(f"report: {report_path}")
    return EXIT_OK


def cmd_report(report_paths, out: str, rank_key: str) -> int:
    reports = [metrics.load_report(p) for p in report_paths]
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)

    metrics.write_plot_csv(reports, out_dir / "cells.csv")

    class_rows = {}
    for r in reports:
        values = r.cre_per_kind or r.rcre_per_kind
        class_rows[r.model_id] = r.class_summary(values)
    (out_dir / "class_summary.json").write_text(
        json.dumps(class_rows, indent=2, sort_keys=True) + "\n"
    )

    lines = []
    if len(reports) >= 1:
        try:
            ranking = metrics.rank_models(reports, rank_key)
            lines.append(f"ranking by {rank_key} (lower is better):")
            for rank, model_id, value in ranking:
                lines.append(f"  ({rank}) {model_id}: {value:.3f}")
            (out_dir / "ranking.json").write_text(
                json.dumps(
                    [
                        {"rank": rank, "model_id": m, rank_key: value}
                        for rank, m, value in ranking
                    ],
                    indent=2,
                )
                + "\n"
            )
        except metrics.MetricError as exc:
            lines.append(f"ranking unavailable: {exc}")
    text = "\n".join(lines) + "\n"
    (out_dir / "ranking.txt").write_text(text)
    print(text)
    print(f"report artifacts in {out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.command == "corrupt":
            cfg = RunConfig(
                command="corrupt",
                benchmark=args.benchmark,
                split=args.split,
                kitti_root=args.kitti_root,
                gopro_root=args.gopro_root,
                frames_4x=args.frames_4x,
                out=args.out,
                seed=args.seed,
                kinds=args.kinds,
                severities=args.severities,
                sequences=tuple(args.sequences.split(",")) if args.sequences else None,
                jobs=args.jobs,
                encoder=args.encoder,
                force=args.force,
                resume=args.resume,
                allow_naive_interpolation=args.allow_naive_interpolation,
            )
            return cmd_corrupt(cfg)
        if args.command == "evaluate":
            cfg = RunConfig(
                command="evaluate",
                out=args.out,
                pred_dir=args.pred_dir,
                gt_from_manifest=args.gt_from_manifest,
                model_id=args.model_id,
            )
            return cmd_evaluate(cfg, report_out=args.report_out)
        if args.command == "report":
            return cmd_report(args.reports, args.out, args.rank_key)
        parser.error(f"unknown command {args.command!r}")
    except (datasets.MissingInputsError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUTS
    except video.EncoderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL_TOOL
    except (metrics.MissingCellsError, metrics.MissingPredictionsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE_GRID
    except (datasets.DatasetError, metrics.MetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
