"""Benchmark construction: KITTI-FC and GoPro-FC layouts and manifests.

KITTI-FC builds on the KITTI-2015 optical flow training layout (200 pairs
with ground truth). The 200 pair ids, sorted, split deterministically: the
first 120 are the ID training split, the remaining 80 the evaluation split.
20 corruption kinds apply (object motion blur and the three video
corruptions are excluded; the 10 FPS source has too few frames).

GoPro-FC builds on five 240 FPS GoPro sequences. The benchmark operates on
the 4x-interpolated 960 FPS stream: 30 FPS pairs are cut every 32 frames of
that stream (the two frames of a pair are 32 frames = 1/30 s apart), 135
pairs per sequence, all 24 corruption kinds. Interpolated frames are read
from a precomputed 960 FPS directory when given; otherwise a naive linear
frame-blending fallback can stand in (clearly non-faithful, flagged in the
manifest). Only object motion blur and the video corruptions touch
interpolated frames: the sampled keyframes fall on multiples of 4, which are
original 240 FPS frames.

Output layout (all relative to the output root)::

    clean/<pair_id>/frame_{a,b}.png
    <kind>/<severity>/<pair_id>/frame_{a,b}.png
    manifest.json            # written last; byte-identical on regeneration
    file_hashes.json         # sha256 per generated file (skip-if-unchanged)
    run_state.json           # in_progress / complete marker
"""

from __future__ import annotations

import hashlib
import json
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .core import (
    GOPRO_FC_KINDS,
    KITTI_FC_KINDS,
    SEVERITIES,
    CorruptionKind,
    ImagePair,
    derive_seed,
    frame_rng,
    severity_params,
    spawn_rng,
)
from .core import CorruptionKind as K
from . import imgops, psf, static_corruptions, temporal_corruptions, video

MANIFEST_SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"
HASHES_NAME = "file_hashes.json"
RUN_STATE_NAME = "run_state.json"

GOPRO_SEQUENCES = (
    "GOPR0374_11_02",
    "GOPR0379_11_00",
    "GOPR0384_11_02",
    "GOPR0385_11_00",
    "GOPR0386_11_00",
)
GOPRO_PAIRS_PER_SEQUENCE = 135
GOPRO_KEYFRAME_STRIDE = 32  # in the 960 FPS stream
KITTI_TIMESTAMP_GAP = 0.1
GOPRO_TIMESTAMP_GAP = GOPRO_KEYFRAME_STRIDE / 960.0
KITTI_TRAIN_SIZE = 120
KITTI_EVAL_SIZE = 80


class DatasetError(RuntimeError):
    pass


class MissingInputsError(DatasetError):
    def __init__(self, what: str, missing):
        self.missing = list(missing)
        listed = "\n  ".join(str(m) for m in self.missing[:20])
        more = "" if len(self.missing) <= 20 else f"\n  ... (+{len(self.missing) - 20} more)"
        super().__init__(f"{what}:\n  {listed}{more}")


# ---------------------------------------------------------------------------
# Pair-level corruption dispatch (the pipeline entry point)
# ---------------------------------------------------------------------------

_STATIC_SHARED = {
    K.CONTRAST: lambda img, s, rng: static_corruptions.apply_contrast(img, s),
    K.SATURATE: lambda img, s, rng: static_corruptions.apply_saturate(img, s),
    K.HIGH_LIGHT: lambda img, s, rng: static_corruptions.apply_light_shift(img, s, "high"),
    K.LOW_LIGHT: lambda img, s, rng: static_corruptions.apply_light_shift(img, s, "low"),
    K.PIXELATE: lambda img, s, rng: static_corruptions.apply_pixelate(img, s),
    K.GAUSSIAN_BLUR: lambda img, s, rng: static_corruptions.apply_static_blur(img, s, "gaussian"),
    K.DEFOCUS_BLUR: lambda img, s, rng: static_corruptions.apply_static_blur(img, s, "defocus"),
    K.GLASS_BLUR: lambda img, s, rng: static_corruptions.apply_static_blur(img, s, "glass", rng),
    K.ELASTIC_TRANSFORM: lambda img, s, rng: static_corruptions.apply_elastic(img, s, rng),
    K.PSF_BLUR: lambda img, s, rng: psf.apply_psf_blur(img, s),
}

_NOISE_KINDS = {
    K.GAUSSIAN_NOISE: "gaussian",
    K.SHOT_NOISE: "shot",
    K.IMPULSE_NOISE: "impulse",
}

_WEATHER_KINDS = {K.SPATTER: "spatter", K.FOG: "fog", K.FROST: "frost"}


def corrupt_pair(pair: ImagePair, kind: CorruptionKind, severity: int, global_seed: int) -> ImagePair:
    """Apply one frame-level corruption with the pair semantics of its kind.

    Object motion blur and the video corruptions are sequence-level and are
    handled by the benchmark builders, not here.
    """
    seed = derive_seed(global_seed, pair.pair_id, kind, severity)
    if kind in _STATIC_SHARED:
        fn = _STATIC_SHARED[kind]
        # Shared params: identical rng stream for both frames
        frame_a = fn(pair.frame_a, severity, spawn_rng(seed))
        frame_b = fn(pair.frame_b, severity, spawn_rng(seed))
        return ImagePair(frame_a, frame_b, pair.pair_id, pair.timestamp_gap)
    if kind is K.JPEG:
        return ImagePair(
            static_corruptions.apply_jpeg(pair.frame_a, severity),
            static_corruptions.apply_jpeg(pair.frame_b, severity),
            pair.pair_id,
            pair.timestamp_gap,
        )
    if kind in _NOISE_KINDS:
        noise = _NOISE_KINDS[kind]
        # Independent per frame: disjoint substreams
        frame_a = static_corruptions.apply_noise(pair.frame_a, severity, noise, frame_rng(seed, 0))
        frame_b = static_corruptions.apply_noise(pair.frame_b, severity, noise, frame_rng(seed, 1))
        return ImagePair(frame_a, frame_b, pair.pair_id, pair.timestamp_gap)
    if kind in (K.OVER_EXPOSURE, K.UNDER_EXPOSURE):
        direction = "over" if kind is K.OVER_EXPOSURE else "under"
        return temporal_corruptions.apply_exposure_pair(pair, severity, direction)
    if kind is K.CAMERA_MOTION_BLUR:
        return temporal_corruptions.apply_camera_motion_pair(pair, severity, spawn_rng(seed))
    if kind in _WEATHER_KINDS:
        return temporal_corruptions.apply_weather_pair(
            pair, severity, _WEATHER_KINDS[kind], spawn_rng(seed)
        )
    if kind is K.SNOW:
        return temporal_corruptions.apply_snow_pair(pair, severity, spawn_rng(seed))
    raise ValueError(f"{kind.value} is not a frame-level corruption")


# ---------------------------------------------------------------------------
# 960 FPS frame access for GoPro
# ---------------------------------------------------------------------------


class FrameProvider:
    """Access to the 960 FPS stream of one sequence.

    Backed either by a precomputed 4x-interpolation directory or by naive
    linear blending between the 240 FPS source frames (fallback; flagged in
    the manifest as non-faithful). Indices reflect at the sequence ends.
    """

    def __init__(self, frames_240: list[Path], frames_960: list[Path] | None):
        if frames_960 is not None and len(frames_960) != 4 * (len(frames_240) - 1) + 1:
            # A 4x interpolator inserts 3 frames between neighbours
            raise DatasetError(
                f"expected {4 * (len(frames_240) - 1) + 1} interpolated frames for "
                f"{len(frames_240)} source frames, found {len(frames_960)}"
            )
        self._frames_240 = frames_240
        self._frames_960 = frames_960
        self.n_frames = 4 * (len(frames_240) - 1) + 1
        self._load = lru_cache(maxsize=64)(self._load_uncached)

    def _load_uncached(self, path: Path) -> np.ndarray:
        return imgops.load_image(path)

    def _reflect(self, i: int) -> int:
        if i < 0:
            i = -i
        if i >= self.n_frames:
            i = 2 * (self.n_frames - 1) - i
        return i

    def get(self, i: int) -> np.ndarray:
        i = self._reflect(i)
        if self._frames_960 is not None:
            return self._load(self._frames_960[i])
        base, frac4 = divmod(i, 4)
        if frac4 == 0:
            return self._load(self._frames_240[base])
        t = frac4 / 4.0
        a = self._load(self._frames_240[base])
        b = self._load(self._frames_240[base + 1])
        return ((1.0 - t) * a + t * b).astype(np.float32)

    def window_mean(self, center: int, half_width: int) -> np.ndarray:
        acc = None
        for j in range(center - half_width, center + half_width + 1):
            frame = self.get(j).astype(np.float64)
            acc = frame if acc is None else acc + frame
        return (acc / (2 * half_width + 1)).astype(np.float32)


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------


def discover_kitti_pairs(kitti_root: str | Path) -> list[dict]:
    root = Path(kitti_root)
    image_dir = root / "image_2"
    flow_dir = root / "flow_occ"
    if not image_dir.is_dir() or not flow_dir.is_dir():
        raise MissingInputsError(
            "KITTI-2015 flow training layout not found (need image_2/ and flow_occ/)",
            [p for p in (image_dir, flow_dir) if not p.is_dir()],
        )
    pair_ids = sorted(p.name[:-4] for p in flow_dir.glob("*_10.png"))
    missing = []
    pairs = []
    for pid in pair_ids:
        frame_a = image_dir / f"{pid}.png"
        frame_b = image_dir / f"{pid[:-3]}_11.png"
        gt = flow_dir / f"{pid}.png"
        missing += [p for p in (frame_a, frame_b, gt) if not p.exists()]
        pairs.append(
            {
                "pair_id": pid,
                "source_a": str(frame_a),
                "source_b": str(frame_b),
                "gt_flow": str(gt),
                "gt_format": "kitti_png16",
            }
        )
    if missing:
        raise MissingInputsError("KITTI files missing", missing)
    if not pairs:
        raise MissingInputsError("KITTI files missing", [flow_dir / "*_10.png"])
    return pairs


def kitti_split(pair_ids) -> tuple[list[str], list[str]]:
    """First 120 pair ids (sorted) train, remaining 80 evaluate."""
    ordered = sorted(pair_ids)
    if len(ordered) != KITTI_TRAIN_SIZE + KITTI_EVAL_SIZE:
        raise DatasetError(
            f"KITTI-2015 training layout must have 200 pairs, found {len(ordered)}"
        )
    return ordered[:KITTI_TRAIN_SIZE], ordered[KITTI_TRAIN_SIZE:]


def plan_kitti_fc(kitti_root: str | Path, split: str, global_seed: int) -> dict:
    if split not in ("eval", "train"):
        raise DatasetError(f"split must be 'eval' or 'train', got {split!r}")
    pairs = discover_kitti_pairs(kitti_root)
    train_ids, eval_ids = kitti_split(p["pair_id"] for p in pairs)
    selected = set(train_ids if split == "train" else eval_ids)
    pairs = [p for p in pairs if p["pair_id"] in selected]
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "benchmark": "kitti_fc",
        "split": split,
        "global_seed": int(global_seed),
        "timestamp_gap": KITTI_TIMESTAMP_GAP,
        "corruption_kinds": [k.value for k in KITTI_FC_KINDS],
        "severities": list(SEVERITIES),
        "source_root": str(Path(kitti_root)),
        "pairs": [
            {
                "pair_id": p["pair_id"],
                "frame_a": f"clean/{p['pair_id']}/frame_a.png",
                "frame_b": f"clean/{p['pair_id']}/frame_b.png",
                "gt_flow": p["gt_flow"],
                "gt_format": p["gt_format"],
                "source_a": p["source_a"],
                "source_b": p["source_b"],
            }
            for p in pairs
        ],
        "cells": {
            f"{k.value}/{s}": "planned" for k in KITTI_FC_KINDS for s in SEVERITIES
        },
        "naive_interpolation": False,
        "encoder_version": None,
    }
    return manifest


def _gopro_sequence_frames(root: Path, sequence: str) -> list[Path]:
    seq_dir = root / sequence
    if not seq_dir.is_dir():
        raise MissingInputsError("GoPro sequence directory missing", [seq_dir])
    frames = sorted(
        p for p in seq_dir.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")
    )
    if not frames:
        raise MissingInputsError("GoPro sequence has no frames", [seq_dir])
    return frames


def plan_gopro_fc(
    gopro_root: str | Path,
    frames_4x: str | Path | None,
    global_seed: int,
    sequences=GOPRO_SEQUENCES,
    allow_naive_interpolation: bool = False,
) -> dict:
    root = Path(gopro_root)
    missing_seqs = [root / s for s in GOPRO_SEQUENCES if not (root / s).is_dir()]
    if missing_seqs:
        raise MissingInputsError("GoPro-FC requires the 5 named sequences", missing_seqs)

    pairs = []
    for seq in sequences:
        frames = _gopro_sequence_frames(root, seq)
        n960 = 4 * (len(frames) - 1) + 1
        n_pairs = (n960 - 1) // GOPRO_KEYFRAME_STRIDE
        if n_pairs < GOPRO_PAIRS_PER_SEQUENCE:
            raise DatasetError(
                f"sequence {seq}: only {n_pairs} pairs available "
                f"({len(frames)} source frames); need {GOPRO_PAIRS_PER_SEQUENCE}"
            )
        for k in range(GOPRO_PAIRS_PER_SEQUENCE):
            key_a = k * GOPRO_KEYFRAME_STRIDE
            key_b = (k + 1) * GOPRO_KEYFRAME_STRIDE
            pid = f"{seq}-{k:04d}"
            pairs.append(
                {
                    "pair_id": pid,
                    "sequence": seq,
                    "keyframe_a": key_a,
                    "keyframe_b": key_b,
                    "frame_a": f"clean/{pid}/frame_a.png",
                    "frame_b": f"clean/{pid}/frame_b.png",
                    # 960 index 4m is the original 240 FPS frame m
                    "source_a": str(frames[key_a // 4]),
                    "source_b": str(frames[key_b // 4]),
                    "gt_flow": None,
                    "gt_format": None,
                }
            )

    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "benchmark": "gopro_fc",
        "split": None,
        "global_seed": int(global_seed),
        "timestamp_gap": GOPRO_TIMESTAMP_GAP,
        "corruption_kinds": [k.value for k in GOPRO_FC_KINDS],
        "severities": list(SEVERITIES),
        "source_root": str(root),
        "frames_4x_root": None if frames_4x is None else str(Path(frames_4x)),
        "sequences": list(sequences),
        "naive_interpolation": bool(allow_naive_interpolation and frames_4x is None),
        "pairs": pairs,
        "cells": {
            f"{k.value}/{s}": "planned" for k in GOPRO_FC_KINDS for s in SEVERITIES
        },
        "encoder_version": None,
    }
    return manifest


def build_kitti_fc(
    kitti_root: str | Path, split: str, out: str | Path, global_seed: int, **materialize_kw
) -> dict:
    """Plan and materialize KITTI-FC in one step; returns the manifest."""
    manifest = plan_kitti_fc(kitti_root, split, global_seed)
    materialize(manifest, out, **materialize_kw)
    return manifest


def build_gopro_fc(
    gopro_root: str | Path,
    frames_4x: str | Path | None,
    out: str | Path,
    global_seed: int,
    sequences=GOPRO_SEQUENCES,
    allow_naive_interpolation: bool = False,
    **materialize_kw,
) -> dict:
    """Plan and materialize GoPro-FC in one step; returns the manifest."""
    manifest = plan_gopro_fc(
        gopro_root,
        frames_4x,
        global_seed,
        sequences=sequences,
        allow_naive_interpolation=allow_naive_interpolation,
    )
    materialize(manifest, out, **materialize_kw)
    return manifest


def validate_manifest(manifest: dict, out_dir: Path | None = None, check_files: bool = False):
    """Structural validation; returns a list of problem strings (empty = ok)."""
    problems = []
    kinds = [CorruptionKind(k) for k in manifest["corruption_kinds"]]
    benchmark = manifest["benchmark"]
    pairs = manifest["pairs"]
    if benchmark == "kitti_fc":
        if set(kinds) != set(KITTI_FC_KINDS):
            problems.append("KITTI-FC corruption set must be the 20 frame-level kinds")
        expected = KITTI_EVAL_SIZE if manifest["split"] == "eval" else KITTI_TRAIN_SIZE
        if len(pairs) != expected:
            problems.append(f"KITTI-FC {manifest['split']} split must have {expected} pairs, got {len(pairs)}")
    elif benchmark == "gopro_fc":
        if set(kinds) != set(GOPRO_FC_KINDS):
            problems.append("GoPro-FC corruption set must be all 24 kinds")
        expected = GOPRO_PAIRS_PER_SEQUENCE * len(manifest.get("sequences", GOPRO_SEQUENCES))
        if len(pairs) != expected:
            problems.append(f"GoPro-FC must have {expected} pairs, got {len(pairs)}")
    else:
        problems.append(f"unknown benchmark {benchmark!r}")

    cells = manifest.get("cells", {})
    for k in kinds:
        for s in SEVERITIES:
            if f"{k.value}/{s}" not in cells:
                problems.append(f"missing grid cell {k.value}/{s}")

    seen = set()
    for p in pairs:
        if p["pair_id"] in seen:
            problems.append(f"duplicate pair id {p['pair_id']}")
        seen.add(p["pair_id"])

    if check_files and out_dir is not None:
        out_dir = Path(out_dir)
        for p in pairs:
            for key in ("frame_a", "frame_b"):
                path = out_dir / p[key]
                if not path.exists():
                    problems.append(f"clean frame missing: {path}")
        for cell, status in cells.items():
            if status != "materialized":
                continue
            kind, severity = cell.split("/")
            for p in pairs:
                for frame in ("frame_a", "frame_b"):
                    path = out_dir / kind / severity / p["pair_id"] / f"{frame}.png"
                    if not path.exists():
                        problems.append(f"corrupted frame missing: {path}")
    return problems


def manifest_bytes(manifest: dict) -> bytes:
    return (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()


def write_manifest(manifest: dict, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / MANIFEST_NAME
    path.write_bytes(manifest_bytes(manifest))
    return path


def load_manifest(out_dir_or_path: str | Path) -> dict:
    path = Path(out_dir_or_path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    manifest = json.loads(path.read_text())
    if manifest.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise DatasetError(f"unsupported manifest schema {manifest.get('schema_version')!r}")
    return manifest


# ---------------------------------------------------------------------------
# Materialization
# ---------------------------------------------------------------------------


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class MaterializeStats:
    written: int = 0
    skipped: int = 0


class _HashStore:
    def __init__(self, out_dir: Path):
        self.path = out_dir / HASHES_NAME
        self.hashes: dict[str, str] = {}
        if self.path.exists():
            self.hashes = json.loads(self.path.read_text())

    def unchanged(self, out_dir: Path, relpath: str) -> bool:
        path = out_dir / relpath
        recorded = self.hashes.get(relpath)
        return recorded is not None and path.exists() and _sha256(path) == recorded

    def record(self, out_dir: Path, relpath: str) -> None:
        self.hashes[relpath] = _sha256(out_dir / relpath)

    def save(self) -> None:
        self.path.write_text(json.dumps(self.hashes, indent=2, sort_keys=True) + "\n")


def _save_pair(pair: ImagePair, out_dir: Path, reldir: str) -> list[str]:
    target = out_dir / reldir
    target.mkdir(parents=True, exist_ok=True)
    rels = [f"{reldir}/frame_a.png", f"{reldir}/frame_b.png"]
    imgops.save_png(pair.frame_a, out_dir / rels[0])
    imgops.save_png(pair.frame_b, out_dir / rels[1])
    return rels


def _load_clean_pair(out_dir: Path, pair_entry: dict, timestamp_gap: float) -> ImagePair:
    return ImagePair(
        imgops.load_image(out_dir / pair_entry["frame_a"]),
        imgops.load_image(out_dir / pair_entry["frame_b"]),
        pair_entry["pair_id"],
        timestamp_gap,
    )


def _corrupt_task(args) -> list[str]:
    """Worker: corrupt one pair for one cell and write the two frames."""
    out_dir, pair_entry, kind_value, severity, global_seed, timestamp_gap = args
    out_dir = Path(out_dir)
    kind = CorruptionKind(kind_value)
    pair = _load_clean_pair(out_dir, pair_entry, timestamp_gap)
    corrupted = corrupt_pair(pair, kind, severity, global_seed)
    return _save_pair(corrupted, out_dir, f"{kind.value}/{severity}/{pair_entry['pair_id']}")


def _object_motion_task(args) -> list[str]:
    out_dir, pair_entry, severity, source_root, frames_4x_root, sequence = args
    out_dir = Path(out_dir)
    provider = _provider_for(source_root, frames_4x_root, sequence)
    half = severity_params(K.OBJECT_MOTION_BLUR, severity)
    pair = ImagePair(
        provider.window_mean(pair_entry["keyframe_a"], half),
        provider.window_mean(pair_entry["keyframe_b"], half),
        pair_entry["pair_id"],
        GOPRO_TIMESTAMP_GAP,
    )
    return _save_pair(pair, out_dir, f"{K.OBJECT_MOTION_BLUR.value}/{severity}/{pair_entry['pair_id']}")


@lru_cache(maxsize=8)
def _provider_for(source_root: str, frames_4x_root: str | None, sequence: str) -> FrameProvider:
    frames_240 = _gopro_sequence_frames(Path(source_root), sequence)
    frames_960 = None
    if frames_4x_root is not None:
        seq_dir = Path(frames_4x_root) / sequence
        if not seq_dir.is_dir():
            raise MissingInputsError("4x frame directory missing", [seq_dir])
        frames_960 = sorted(
            p for p in seq_dir.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")
        )
    return FrameProvider(frames_240, frames_960)


def materialize(
    manifest: dict,
    out_dir: str | Path,
    kinds=None,
    severities=None,
    jobs: int = 1,
    force: bool = False,
    encoder: str | None = None,
) -> MaterializeStats:
    """Generate clean and corrupted frames for the selected grid cells.

    Work is parallel over pairs; per-pair seeds make the result independent
    of execution order. Re-runs skip files whose recorded content hash still
    matches (unless ``force``). The manifest is updated and rewritten last.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if kinds is None:
        kinds = manifest["corruption_kinds"]
    selected_kinds = [CorruptionKind(k) for k in kinds]
    unknown = [k for k in selected_kinds if k.value not in manifest["corruption_kinds"]]
    if unknown:
        raise DatasetError(
            f"kinds {[k.value for k in unknown]} are not part of benchmark "
            f"{manifest['benchmark']}"
        )
    selected_sevs = [int(s) for s in (SEVERITIES if severities is None else severities)]
    stats = MaterializeStats()
    hashes = _HashStore(out_dir)
    global_seed = manifest["global_seed"]
    gap = manifest["timestamp_gap"]

    def emit(relpaths: list[str]):
        for rel in relpaths:
            hashes.record(out_dir, rel)
        stats.written += len(relpaths)

    # Clean frames first: corruption tasks read the quantized clean frames,
    # so every corruption sees exactly the pixels a model would.
    for p in manifest["pairs"]:
        rels = [p["frame_a"], p["frame_b"]]
        if not force and all(hashes.unchanged(out_dir, r) for r in rels):
            stats.skipped += len(rels)
            continue
        pair = ImagePair(
            imgops.load_image(p["source_a"]),
            imgops.load_image(p["source_b"]),
            p["pair_id"],
            gap,
        )
        emit(_save_pair(pair, out_dir, f"clean/{p['pair_id']}"))

    frame_kinds = [
        k
        for k in selected_kinds
        if k not in video.VIDEO_KINDS and k is not K.OBJECT_MOTION_BLUR
    ]
    tasks = []
    for kind in frame_kinds:
        for severity in selected_sevs:
            for p in manifest["pairs"]:
                rels = [
                    f"{kind.value}/{severity}/{p['pair_id']}/frame_a.png",
                    f"{kind.value}/{severity}/{p['pair_id']}/frame_b.png",
                ]
                if not force and all(hashes.unchanged(out_dir, r) for r in rels):
                    stats.skipped += len(rels)
                    continue
                tasks.append((str(out_dir), p, kind.value, severity, global_seed, gap))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for rels in pool.map(_corrupt_task, tasks, chunksize=4):
                emit(rels)
    else:
        for t in tasks:
            emit(_corrupt_task(t))

    if K.OBJECT_MOTION_BLUR in selected_kinds:
        _materialize_object_motion(manifest, out_dir, selected_sevs, force, hashes, stats, jobs)

    video_kinds = [k for k in selected_kinds if k in video.VIDEO_KINDS]
    if video_kinds:
        _materialize_video(
            manifest, out_dir, video_kinds, selected_sevs, force, hashes, stats, encoder
        )

    for kind in selected_kinds:
        for severity in selected_sevs:
            manifest["cells"][f"{kind.value}/{severity}"] = "materialized"
    hashes.save()
    write_manifest(manifest, out_dir)
    return stats


def _materialize_object_motion(manifest, out_dir: Path, severities, force, hashes, stats, jobs):
    if manifest["benchmark"] != "gopro_fc":
        raise DatasetError("object motion blur requires a GoPro-FC manifest")
    if manifest.get("frames_4x_root") is None and not manifest.get("naive_interpolation"):
        raise DatasetError(
            "object motion blur needs precomputed 960 FPS frames (frames_4x) or the "
            "naive interpolation fallback enabled"
        )
    tasks = []
    for severity in severities:
        for p in manifest["pairs"]:
            rels = [
                f"{K.OBJECT_MOTION_BLUR.value}/{severity}/{p['pair_id']}/frame_a.png",
                f"{K.OBJECT_MOTION_BLUR.value}/{severity}/{p['pair_id']}/frame_b.png",
            ]
            if not force and all(hashes.unchanged(out_dir, r) for r in rels):
                stats.skipped += len(rels)
                continue
            tasks.append(
                (
                    str(out_dir),
                    p,
                    severity,
                    manifest["source_root"],
                    manifest.get("frames_4x_root"),
                    p["sequence"],
                )
            )

    def emit(relpaths):
        for rel in relpaths:
            hashes.record(out_dir, rel)
        stats.written += len(relpaths)

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for rels in pool.map(_object_motion_task, tasks, chunksize=1):
                emit(rels)
    else:
        for t in tasks:
            emit(_object_motion_task(t))


def _materialize_video(manifest, out_dir: Path, kinds, severities, force, hashes, stats, encoder):
    if manifest["benchmark"] != "gopro_fc":
        raise DatasetError("video corruptions require a GoPro-FC manifest")
    if manifest.get("frames_4x_root") is None and not manifest.get("naive_interpolation"):
        raise DatasetError(
            "video corruptions need precomputed 960 FPS frames (frames_4x) or the "
            "naive interpolation fallback enabled"
        )
    exe = video.require_encoder(encoder)
    by_sequence: dict[str, list[dict]] = {}
    for p in manifest["pairs"]:
        by_sequence.setdefault(p["sequence"], []).append(p)

    work_root = out_dir / "_video_work"
    for sequence, seq_pairs in sorted(by_sequence.items()):
        provider = _provider_for(
            manifest["source_root"], manifest.get("frames_4x_root"), sequence
        )
        n_needed = max(p["keyframe_b"] for p in seq_pairs) + 1
        for kind in kinds:
            for severity in severities:
                rels = [
                    f"{kind.value}/{severity}/{p['pair_id']}/frame_{f}.png"
                    for p in seq_pairs
                    for f in ("a", "b")
                ]
                if not force and all(hashes.unchanged(out_dir, r) for r in rels):
                    stats.skipped += len(rels)
                    continue
                workdir = work_root / f"{sequence}_{kind.value}_s{severity}"
                keyframes = {i for p in seq_pairs for i in (p["keyframe_a"], p["keyframe_b"])}
                result = video.apply_video_corruption(
                    (provider.get(i) for i in range(n_needed)),
                    severity,
                    kind,
                    workdir,
                    fps=960,
                    encoder=exe,
                    keep_indices=keyframes,
                )
                manifest["encoder_version"] = result.encoder_version
                indices = [(p["keyframe_a"], p["keyframe_b"]) for p in seq_pairs]
                pairs = video.extract_pairs_from_stream(
                    result.frames, indices, [p["pair_id"] for p in seq_pairs]
                )
                for p_entry, pair in zip(seq_pairs, pairs):
                    relpaths = _save_pair(
                        pair, out_dir, f"{kind.value}/{severity}/{p_entry['pair_id']}"
                    )
                    for rel in relpaths:
                        hashes.record(out_dir, rel)
                    stats.written += len(relpaths)
                shutil.rmtree(workdir, ignore_errors=True)
    shutil.rmtree(work_root, ignore_errors=True)
