"""Robustness metrics and their aggregation.

Definitions (per corruption ``c`` at severity ``s``):

* ``EPE``: mean Euclidean distance between predicted and reference flow over
  valid pixels.
* ``CRE_{c,s} = EPE_{c,s} - EPE_clean`` (may be negative when a corruption
  accidentally helps).
* ``CRE_c``: mean of ``CRE_{c,s}`` over the five severities; ``CRE``: mean of
  ``CRE_c`` over all corruptions.
* ``CREr = CRE / EPE_clean``: relative robustness, independent of base
  accuracy.
* ``RCRE_{c,s}``: mean Euclidean distance between the corrupted-input
  prediction and the clean-input prediction; needs no ground truth.
  ``RCRE_c`` and ``RCRE`` aggregate like CRE.

Ground-truth-based metrics are restricted to pixels with ground truth (the
valid mask). Pair-level EPE is the valid-pixel mean; benchmark-level values
are unweighted means over pairs, folded with ``math.fsum`` so aggregation is
order-independent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    CORRUPTION_CLASSES,
    SEVERITIES,
    CorruptionKind,
    corruption_class,
)
from . import flowio

REPORT_SCHEMA_VERSION = 1

RANK_KEYS = ("cre", "crer", "rcre", "epe")


class MetricError(ValueError):
    pass


class MissingCellsError(MetricError):
    def __init__(self, missing):
        self.missing = list(missing)
        listed = ", ".join(f"{k.value}/s{s}" for k, s in self.missing[:12])
        more = "" if len(self.missing) <= 12 else f" (+{len(self.missing) - 12} more)"
        super().__init__(f"missing grid cells: {listed}{more}")


@dataclass(frozen=True)
class EpeValue:
    value: float
    pixel_count: int

    def __post_init__(self):
        if self.pixel_count < 1:
            raise MetricError("EPE requires at least one valid pixel")
        if self.value < 0 or not math.isfinite(self.value):
            raise MetricError(f"invalid EPE value {self.value}")


def _check_fields(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    if a.shape != b.shape:
        raise MetricError(f"flow shapes differ: {a.shape} vs {b.shape}")
    if a.ndim != 3 or a.shape[2] != 2:
        raise MetricError(f"flow must have shape (H, W, 2), got {a.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise MetricError("flow fields must be finite (no NaN/Inf)")
    if mask is None:
        mask = np.ones(a.shape[:2], dtype=bool)
    if mask.shape != a.shape[:2]:
        raise MetricError(f"mask shape {mask.shape} does not match flow {a.shape[:2]}")
    if not mask.any():
        raise MetricError("mask has zero valid pixels")
    return mask


def epe(pred: np.ndarray, gt: np.ndarray, mask: np.ndarray | None = None) -> EpeValue:
    """Mean end-point error over valid pixels."""
    mask = _check_fields(pred, gt, mask)
    diff = pred.astype(np.float64) - gt.astype(np.float64)
    dist = np.sqrt(diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2)
    return EpeValue(float(dist[mask].mean()), int(mask.sum()))


def rcre(
    pred_corrupt: np.ndarray, pred_clean: np.ndarray, mask: np.ndarray | None = None
) -> float:
    """Mean distance between corrupted-input and clean-input predictions."""
    mask = _check_fields(pred_corrupt, pred_clean, mask)
    diff = pred_corrupt.astype(np.float64) - pred_clean.astype(np.float64)
    dist = np.sqrt(diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2)
    return float(dist[mask].mean())


def cre(epe_cs: EpeValue, epe_clean: EpeValue) -> float:
    """EPE difference against the clean run; both sides must share a mask."""
    if epe_cs.pixel_count != epe_clean.pixel_count:
        raise MetricError(
            f"mask mismatch: corrupted EPE over {epe_cs.pixel_count} px, "
            f"clean over {epe_clean.pixel_count} px"
        )
    return epe_cs.value - epe_clean.value


def crer(cre_total: float, epe_clean: float) -> float:
    if epe_clean <= 0:
        raise MetricError(f"CREr undefined: clean EPE must be positive, got {epe_clean}")
    return cre_total / epe_clean


def fmean(values) -> float:
    """Order-independent mean (exactly rounded compensated summation)."""
    values = list(values)
    return math.fsum(values) / len(values)


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CellMetrics:
    """Benchmark-level metrics of one (corruption, severity) grid cell."""

    kind: CorruptionKind
    severity: int
    epe: float | None = None
    rcre: float | None = None


@dataclass
class RobustnessReport:
    benchmark: str
    model_id: str
    corruption_kinds: tuple[CorruptionKind, ...]
    epe_clean: float | None
    cells: dict[tuple[CorruptionKind, int], CellMetrics]
    cre_per_cell: dict[tuple[CorruptionKind, int], float]
    cre_per_kind: dict[CorruptionKind, float]
    rcre_per_kind: dict[CorruptionKind, float]
    cre: float | None
    crer: float | None
    rcre: float | None
    avg_corrupted_epe: float | None
    metadata: dict = field(default_factory=dict)

    def class_summary(self, values_per_kind: dict[CorruptionKind, float]) -> dict[str, float]:
        """Mean per corruption class (for the kinds present in this report)."""
        out = {}
        for cls, members in CORRUPTION_CLASSES.items():
            present = [values_per_kind[k] for k in members if k in values_per_kind]
            if present:
                out[cls] = fmean(present)
        return out


def aggregate(
    benchmark: str,
    model_id: str,
    corruption_kinds,
    epe_clean: float | None,
    cells,
    metadata: dict | None = None,
) -> RobustnessReport:
    """Fold per-cell metrics into the full report.

    ``cells`` is an iterable of :class:`CellMetrics`; the grid must be
    complete over ``corruption_kinds`` x severities 1..5.
    """
    kinds = tuple(CorruptionKind(k) for k in corruption_kinds)
    table = {(c.kind, c.severity): c for c in cells}
    missing = [(k, s) for k in kinds for s in SEVERITIES if (k, s) not in table]
    if missing:
        raise MissingCellsError(missing)

    have_epe = all(table[(k, s)].epe is not None for k in kinds for s in SEVERITIES)
    have_rcre = all(table[(k, s)].rcre is not None for k in kinds for s in SEVERITIES)
    if have_epe and (epe_clean is None):
        raise MetricError("cells carry EPE but no clean EPE was provided")

    cre_per_cell: dict[tuple[CorruptionKind, int], float] = {}
    cre_per_kind: dict[CorruptionKind, float] = {}
    rcre_per_kind: dict[CorruptionKind, float] = {}
    for k in kinds:
        if have_epe:
            per_sev = [table[(k, s)].epe - epe_clean for s in SEVERITIES]
            for s, v in zip(SEVERITIES, per_sev):
                cre_per_cell[(k, s)] = v
            cre_per_kind[k] = fmean(per_sev)
        if have_rcre:
            rcre_per_kind[k] = fmean(table[(k, s)].rcre for s in SEVERITIES)

    cre_total = fmean(cre_per_kind.values()) if have_epe else None
    rcre_total = fmean(rcre_per_kind.values()) if have_rcre else None
    avg_epe = (
        fmean(fmean(table[(k, s)].epe for s in SEVERITIES) for k in kinds)
        if have_epe
        else None
    )
    crer_total = None
    if cre_total is not None and epe_clean is not None and epe_clean > 0:
        crer_total = crer(cre_total, epe_clean)

    return RobustnessReport(
        benchmark=benchmark,
        model_id=model_id,
        corruption_kinds=kinds,
        epe_clean=epe_clean,
        cells=table,
        cre_per_cell=cre_per_cell,
        cre_per_kind=cre_per_kind,
        rcre_per_kind=rcre_per_kind,
        cre=cre_total,
        crer=crer_total,
        rcre=rcre_total,
        avg_corrupted_epe=avg_epe,
        metadata=dict(metadata or {}),
    )


# ---------------------------------------------------------------------------
# Ranking
# ---------------------------------------------------------------------------


def report_key_value(report: RobustnessReport, key: str) -> float:
    key = key.lower()
    if key not in RANK_KEYS:
        raise MetricError(f"unknown ranking key {key!r}; choose from {RANK_KEYS}")
    value = {
        "cre": report.cre,
        "crer": report.crer,
        "rcre": report.rcre,
        "epe": report.avg_corrupted_epe,
    }[key]
    if value is None:
        raise MetricError(f"report for {report.model_id} has no {key} value")
    return value


def rank_models(reports, key: str) -> list[tuple[int, str, float]]:
    """Ascending ranking (lower is better); ties share the smaller rank."""
    reports = list(reports)
    if not reports:
        raise MetricError("need at least one report to rank")
    bench = {(r.benchmark, r.corruption_kinds) for r in reports}
    if len(bench) != 1:
        raise MetricError("reports mix different benchmarks or corruption sets")
    scored = sorted(
        ((report_key_value(r, key), r.model_id) for r in reports),
        key=lambda t: (t[0], t[1]),
    )
    values = [v for v, _ in scored]
    out = []
    for value, model_id in scored:
        rank = 1 + sum(1 for v in values if v < value)
        out.append((rank, model_id, value))
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def report_to_dict(report: RobustnessReport) -> dict:
    per_kind = {}
    for k in report.corruption_kinds:
        entry: dict = {"class": corruption_class(k), "severities": {}}
        if k in report.cre_per_kind:
            entry["cre"] = report.cre_per_kind[k]
        if k in report.rcre_per_kind:
            entry["rcre"] = report.rcre_per_kind[k]
        for s in SEVERITIES:
            cell = report.cells[(k, s)]
            sev_entry = {}
            if cell.epe is not None:
                sev_entry["epe"] = cell.epe
                sev_entry["cre"] = report.cre_per_cell[(k, s)]
            if cell.rcre is not None:
                sev_entry["rcre"] = cell.rcre
            entry["severities"][str(s)] = sev_entry
        per_kind[k.value] = entry
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "benchmark": report.benchmark,
        "model_id": report.model_id,
        "corruption_kinds": [k.value for k in report.corruption_kinds],
        "epe_clean": report.epe_clean,
        "cre": report.cre,
        "crer": report.crer,
        "rcre": report.rcre,
        "avg_corrupted_epe": report.avg_corrupted_epe,
        "per_kind": per_kind,
        "metadata": report.metadata,
    }


def report_from_dict(data: dict) -> RobustnessReport:
    if data.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise MetricError(f"unsupported report schema {data.get('schema_version')!r}")
    kinds = [CorruptionKind(k) for k in data["corruption_kinds"]]
    cells = []
    for k in kinds:
        for s in SEVERITIES:
            sev = data["per_kind"][k.value]["severities"][str(s)]
            cells.append(CellMetrics(k, s, epe=sev.get("epe"), rcre=sev.get("rcre")))
    return aggregate(
        data["benchmark"],
        data["model_id"],
        kinds,
        data.get("epe_clean"),
        cells,
        data.get("metadata"),
    )


def save_report(report: RobustnessReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
    )


def load_report(path: str | Path) -> RobustnessReport:
    return report_from_dict(json.loads(Path(path).read_text()))


def render_table(report: RobustnessReport) -> str:
    """Aligned plain-text table: one row per corruption, severity columns."""
    has_cre = bool(report.cre_per_kind)
    cols = ["corruption", "class"] + [f"s{s}" for s in SEVERITIES] + ["mean"]
    rows = []
    for k in report.corruption_kinds:
        if has_cre:
            vals = [report.cre_per_cell[(k, s)] for s in SEVERITIES]
            mean = report.cre_per_kind[k]
        else:
            vals = [report.cells[(k, s)].rcre for s in SEVERITIES]
            mean = report.rcre_per_kind[k]
        rows.append(
            [k.value, corruption_class(k)] + [f"{v:.3f}" for v in vals] + [f"{mean:.3f}"]
        )
    widths = [max(len(str(r[i])) for r in rows + [cols]) for i in range(len(cols))]
    lines = [
        "  ".join(c.ljust(w) for c, w in zip(cols, widths)),
        "  ".join("-" * w for w in widths),
    ]
    lines += ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)) for r in rows]
    metric = "CRE" if has_cre else "RCRE"
    summary = [f"model={report.model_id}", f"benchmark={report.benchmark}"]
    if report.epe_clean is not None:
        summary.append(f"EPE_clean={report.epe_clean:.3f}")
    if report.cre is not None:
        summary.append(f"CRE={report.cre:.3f}")
    if report.crer is not None:
        summary.append(f"CREr={report.crer:.3f}")
    if report.rcre is not None:
        summary.append(f"RCRE={report.rcre:.3f}")
    lines.append("")
    lines.append(f"[{metric} per severity]  " + "  ".join(summary))
    return "\n".join(lines) + "\n"


def write_plot_csv(reports, path: str | Path) -> None:
    """Long-form CSV of every cell metric, for downstream plotting."""
    lines = ["model,benchmark,kind,class,severity,epe,cre,rcre"]
    for r in reports:
        for k in r.corruption_kinds:
            for s in SEVERITIES:
                cell = r.cells[(k, s)]
                cre_v = r.cre_per_cell.get((k, s))
                lines.append(
                    ",".join(
                        [
                            r.model_id,
                            r.benchmark,
                            k.value,
                            corruption_class(k),
                            str(s),
                            "" if cell.epe is None else f"{cell.epe:.6f}",
                            "" if cre_v is None else f"{cre_v:.6f}",
                            "" if cell.rcre is None else f"{cell.rcre:.6f}",
                        ]
                    )
                )
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Manifest-driven evaluation
# ---------------------------------------------------------------------------


class MissingPredictionsError(MetricError):
    def __init__(self, missing):
        self.missing = list(missing)
        listed = "\n  ".join(self.missing[:20])
        more = "" if len(self.missing) <= 20 else f"\n  ... (+{len(self.missing) - 20} more)"
        super().__init__(
            f"{len(self.missing)} prediction file(s) missing:\n  {listed}{more}"
        )


def prediction_path(pred_dir: Path, pair_id: str, kind: CorruptionKind | None, severity=None):
    """Canonical prediction naming shared with the model-runner adapters."""
    sub = Path("clean") if kind is None else Path(kind.value) / str(severity)
    base = pred_dir / sub / pair_id
    for suffix in (".flo", ".png"):
        candidate = base.with_suffix(suffix)
        if candidate.exists():
            return candidate
    return base.with_suffix(".flo")


def evaluate_manifest(
    manifest: dict,
    manifest_dir: Path,
    pred_dir: str | Path,
    model_id: str = "model",
    require_gt: bool = False,
) -> RobustnessReport:
    """Score a prediction directory against a benchmark manifest."""
    pred_dir = Path(pred_dir)
    pairs = manifest["pairs"]
    kinds = [CorruptionKind(k) for k in manifest["corruption_kinds"]]
    has_gt = all(p.get("gt_flow") for p in pairs)
    if require_gt and not has_gt:
        raise MetricError("ground truth required but manifest has pairs without gt_flow")

    missing = []
    for p in pairs:
        for kind, severity in [(None, None)] + [(k, s) for k in kinds for s in SEVERITIES]:
            path = prediction_path(pred_dir, p["pair_id"], kind, severity)
            if not path.exists():
                missing.append(str(path))
    if missing:
        raise MissingPredictionsError(missing)

    def resolve(path_str: str) -> Path:
        path = Path(path_str)
        return path if path.is_absolute() else manifest_dir / path

    gt_cache: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    clean_preds: dict[str, np.ndarray] = {}
    clean_epes: dict[str, EpeValue] = {}
    for p in pairs:
        pid = p["pair_id"]
        pred, _ = flowio.read_flow(prediction_path(pred_dir, pid, None))
        clean_preds[pid] = pred
        if has_gt:
            gt, valid = flowio.read_flow(resolve(p["gt_flow"]), p.get("gt_format"))
            if gt.shape != pred.shape:
                raise MetricError(
                    f"{pid}: prediction shape {pred.shape[:2]} != ground truth {gt.shape[:2]}"
                )
            gt_cache[pid] = (gt, valid)
            clean_epes[pid] = epe(pred, gt, valid)

    epe_clean = fmean(e.value for e in clean_epes.values()) if has_gt else None

    cells = []
    for kind in kinds:
        for severity in SEVERITIES:
            epes = []
            rcres = []
            for p in pairs:
                pid = p["pair_id"]
                pred, _ = flowio.read_flow(prediction_path(pred_dir, pid, kind, severity))
                if pred.shape != clean_preds[pid].shape:
                    raise MetricError(
                        f"{pid} {kind.value}/s{severity}: prediction shape "
                        f"{pred.shape[:2]} != clean prediction {clean_preds[pid].shape[:2]}"
                    )
                if has_gt:
                    gt, valid = gt_cache[pid]
                    epes.append(epe(pred, gt, valid).value)
                    rcres.append(rcre(pred, clean_preds[pid], valid))
                else:
                    rcres.append(rcre(pred, clean_preds[pid]))
            cells.append(
                CellMetrics(
                    kind,
                    severity,
                    epe=fmean(epes) if has_gt else None,
                    rcre=fmean(rcres),
                )
            )

    metadata = {
        "global_seed": manifest.get("global_seed"),
        "benchmark": manifest.get("benchmark"),
        "split": manifest.get("split"),
        "encoder_version": manifest.get("encoder_version"),
    }
    return aggregate(
        manifest["benchmark"], model_id, kinds, epe_clean, cells, metadata
    )
