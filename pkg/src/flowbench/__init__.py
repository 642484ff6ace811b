"""Corruption-robustness benchmarking for optical flow.

Synthesizes 24 image-pair corruptions at 5 severity levels, builds the
KITTI-FC and GoPro-FC benchmark layouts, and evaluates flow predictions with
the EPE / CRE / CREr / RCRE robustness metrics.
"""

from .core import (
    ALL_BENCHMARK_KINDS,
    CORRUPTION_CLASSES,
    GOPRO_FC_KINDS,
    KITTI_FC_KINDS,
    SEVERITIES,
    SEVERITY_TABLES,
    CorruptionKind,
    CorruptionSpec,
    ImagePair,
    PairSemantics,
    PAIR_SEMANTICS,
    clamp_image,
    derive_seed,
    frame_rng,
    spawn_rng,
)
from .datasets import corrupt_pair, plan_gopro_fc, plan_kitti_fc, validate_manifest
from .metrics import EpeValue, RobustnessReport, aggregate, cre, crer, epe, rank_models, rcre

__version__ = "0.1.0"

__all__ = [
    "ALL_BENCHMARK_KINDS",
    "CORRUPTION_CLASSES",
    "GOPRO_FC_KINDS",
    "KITTI_FC_KINDS",
    "SEVERITIES",
    "SEVERITY_TABLES",
    "CorruptionKind",
    "CorruptionSpec",
    "ImagePair",
    "PairSemantics",
    "PAIR_SEMANTICS",
    "EpeValue",
    "RobustnessReport",
    "aggregate",
    "clamp_image",
    "corrupt_pair",
    "cre",
    "crer",
    "derive_seed",
    "epe",
    "frame_rng",
    "plan_gopro_fc",
    "plan_kitti_fc",
    "rank_models",
    "rcre",
    "spawn_rng",
    "validate_manifest",
]
