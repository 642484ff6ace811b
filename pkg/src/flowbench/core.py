"""Shared domain types, value conventions, and deterministic randomness.

Conventions used across the package:

* Images are ``float32`` arrays of shape ``(H, W, 3)``, RGB, intensities in
  ``[0, 1]``. 8-bit inputs are divided by 255 on load and re-quantized with
  round-half-up on save.
* Flow fields are ``float32`` arrays of shape ``(H, W, 2)`` holding per-pixel
  ``(u, v)`` displacements in pixels. Validity masks are ``bool`` arrays of
  shape ``(H, W)``.
* All randomness flows through the counter-based Philox-4x64 generator keyed
  by :func:`derive_seed`. The key derivation (SHA-256 of a canonical byte
  encoding, first 8 bytes little-endian) and the generator algorithm are both
  fixed so golden outputs are portable across platforms. Frame-level
  substreams use ``Philox.jumped(n)`` (frame A: ``n=1``, frame B: ``n=2``);
  pair-level parameter draws use the unjumped stream.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class CorruptionKind(str, Enum):
    JPEG = "jpeg"
    PIXELATE = "pixelate"
    CONTRAST = "contrast"
    SATURATE = "saturate"
    HIGH_LIGHT = "high_light"
    LOW_LIGHT = "low_light"
    OVER_EXPOSURE = "over_exposure"
    UNDER_EXPOSURE = "under_exposure"
    SPATTER = "spatter"
    FOG = "fog"
    FROST = "frost"
    SNOW = "snow"
    GAUSSIAN_NOISE = "gaussian_noise"
    SHOT_NOISE = "shot_noise"
    IMPULSE_NOISE = "impulse_noise"
    GAUSSIAN_BLUR = "gaussian_blur"
    DEFOCUS_BLUR = "defocus_blur"
    GLASS_BLUR = "glass_blur"
    CAMERA_MOTION_BLUR = "camera_motion_blur"
    OBJECT_MOTION_BLUR = "object_motion_blur"
    PSF_BLUR = "psf_blur"
    H264_CRF = "h264_crf"
    H264_ABR = "h264_abr"
    BIT_ERROR = "bit_error"
    # Implemented but excluded from the 24-kind benchmark sets.
    ELASTIC_TRANSFORM = "elastic_transform"

    def __str__(self) -> str:  # argparse/json friendliness
        return self.value


class PairSemantics(str, Enum):
    """How a corruption treats the two frames of a pair."""

    SHARED_PARAMS = "shared_params"
    INDEPENDENT_PER_FRAME = "independent_per_frame"
    ASYMMETRIC_SECOND_FRAME = "asymmetric_second_frame"
    TEMPORAL_PARTICLES = "temporal_particles"
    MOTION_ACCUMULATION = "motion_accumulation"
    STREAM_LEVEL = "stream_level"


K = CorruptionKind

PAIR_SEMANTICS: dict[CorruptionKind, PairSemantics] = {
    K.SPATTER: PairSemantics.SHARED_PARAMS,
    K.FOG: PairSemantics.SHARED_PARAMS,
    K.FROST: PairSemantics.SHARED_PARAMS,
    K.HIGH_LIGHT: PairSemantics.SHARED_PARAMS,
    K.LOW_LIGHT: PairSemantics.SHARED_PARAMS,
    K.CONTRAST: PairSemantics.SHARED_PARAMS,
    K.SATURATE: PairSemantics.SHARED_PARAMS,
    K.PIXELATE: PairSemantics.SHARED_PARAMS,
    K.GAUSSIAN_BLUR: PairSemantics.SHARED_PARAMS,
    K.DEFOCUS_BLUR: PairSemantics.SHARED_PARAMS,
    K.GLASS_BLUR: PairSemantics.SHARED_PARAMS,
    K.PSF_BLUR: PairSemantics.SHARED_PARAMS,
    K.CAMERA_MOTION_BLUR: PairSemantics.SHARED_PARAMS,
    K.ELASTIC_TRANSFORM: PairSemantics.SHARED_PARAMS,
    K.JPEG: PairSemantics.INDEPENDENT_PER_FRAME,
    K.GAUSSIAN_NOISE: PairSemantics.INDEPENDENT_PER_FRAME,
    K.SHOT_NOISE: PairSemantics.INDEPENDENT_PER_FRAME,
    K.IMPULSE_NOISE: PairSemantics.INDEPENDENT_PER_FRAME,
    K.OVER_EXPOSURE: PairSemantics.ASYMMETRIC_SECOND_FRAME,
    K.UNDER_EXPOSURE: PairSemantics.ASYMMETRIC_SECOND_FRAME,
    K.SNOW: PairSemantics.TEMPORAL_PARTICLES,
    K.OBJECT_MOTION_BLUR: PairSemantics.MOTION_ACCUMULATION,
    K.H264_CRF: PairSemantics.STREAM_LEVEL,
    K.H264_ABR: PairSemantics.STREAM_LEVEL,
    K.BIT_ERROR: PairSemantics.STREAM_LEVEL,
}

# The six corruption classes used by reports.
CORRUPTION_CLASSES: dict[str, tuple[CorruptionKind, ...]] = {
    "digital": (K.JPEG, K.PIXELATE, K.CONTRAST, K.SATURATE),
    "illumination": (K.HIGH_LIGHT, K.LOW_LIGHT, K.OVER_EXPOSURE, K.UNDER_EXPOSURE),
    "weather": (K.SPATTER, K.FOG, K.FROST, K.SNOW),
    "noise": (K.GAUSSIAN_NOISE, K.SHOT_NOISE, K.IMPULSE_NOISE),
    "blur": (
        K.GAUSSIAN_BLUR,
        K.DEFOCUS_BLUR,
        K.GLASS_BLUR,
        K.CAMERA_MOTION_BLUR,
        K.OBJECT_MOTION_BLUR,
        K.PSF_BLUR,
    ),
    "video": (K.H264_CRF, K.H264_ABR, K.BIT_ERROR),
}

#: All 24 benchmark corruptions (elastic transform is implemented but not in
#: the benchmark sets).
ALL_BENCHMARK_KINDS: tuple[CorruptionKind, ...] = tuple(
    k for kinds in CORRUPTION_CLASSES.values() for k in kinds
)

#: GoPro-FC uses all 24 kinds; KITTI-FC excludes object motion blur (10 FPS
#: source) and the three video corruptions (not enough frames).
GOPRO_FC_KINDS: tuple[CorruptionKind, ...] = ALL_BENCHMARK_KINDS
KITTI_FC_KINDS: tuple[CorruptionKind, ...] = tuple(
    k
    for k in ALL_BENCHMARK_KINDS
    if k not in (K.OBJECT_MOTION_BLUR, K.H264_CRF, K.H264_ABR, K.BIT_ERROR)
)

SEVERITIES = (1, 2, 3, 4, 5)


def corruption_class(kind: CorruptionKind) -> str:
    for name, kinds in CORRUPTION_CLASSES.items():
        if kind in kinds:
            return name
    if kind is K.ELASTIC_TRANSFORM:
        return "digital"
    raise KeyError(kind)


# ---------------------------------------------------------------------------
# Severity parameter ladders, indexed by severity - 1.
# ---------------------------------------------------------------------------

SEVERITY_TABLES: dict[CorruptionKind, tuple] = {
    K.JPEG: (25, 18, 15, 10, 7),
    K.PIXELATE: (0.6, 0.5, 0.4, 0.3, 0.25),
    K.CONTRAST: (0.4, 0.3, 0.2, 0.1, 0.05),
    K.SATURATE: ((0.1, 0.0), (0.3, 0.0), (2.0, 0.0), (5.0, 0.1), (20.0, 0.2)),
    K.HIGH_LIGHT: (0.1, 0.2, 0.3, 0.4, 0.5),
    K.LOW_LIGHT: (0.1, 0.2, 0.3, 0.4, 0.5),
    K.OVER_EXPOSURE: (0.4, 0.8, 1.2, 1.6, 2.0),
    K.UNDER_EXPOSURE: (-0.4, -0.8, -1.2, -1.6, -2.0),
    K.GAUSSIAN_NOISE: (0.08, 0.12, 0.18, 0.26, 0.38),
    K.SHOT_NOISE: (60.0, 25.0, 12.0, 5.0, 3.0),
    K.IMPULSE_NOISE: (0.03, 0.06, 0.09, 0.17, 0.27),
    K.GAUSSIAN_BLUR: (1.0, 2.0, 3.0, 4.0, 6.0),
    K.DEFOCUS_BLUR: (3, 4, 6, 8, 10),
    K.GLASS_BLUR: ((0.7, 1, 2), (0.9, 2, 1), (1.0, 2, 3), (1.1, 3, 2), (1.5, 4, 2)),
    K.ELASTIC_TRANSFORM: (12.5, 16.25, 21.25, 25.0, 30.0),
    K.CAMERA_MOTION_BLUR: ((10, 3), (15, 5), (15, 8), (15, 12), (20, 15)),
    K.OBJECT_MOTION_BLUR: (3, 6, 9, 12, 15),
    # PSF blur: RMS spot radius in mm of the five built-in lenses (4 um pixels).
    K.PSF_BLUR: (0.0296, 0.0832, 0.1102, 0.1588, 0.1939),
    K.H264_CRF: (23, 30, 37, 44, 51),
    K.H264_ABR: (25_000_000, 12_500_000, 6_250_000, 3_125_000, 1_562_500),
    K.BIT_ERROR: (50_000_000, 25_000_000, 15_000_000, 10_000_000, 1_000_000),
    # Weather ladders follow the parameterization style of the common
    # single-image corruption suite (see the corruption modules for meaning).
    # (occluded_fraction, blur_sigma, mud_flag)
    K.SPATTER: ((0.05, 4.0, 0), (0.08, 3.0, 0), (0.12, 2.0, 0), (0.18, 1.5, 1), (0.25, 1.5, 1)),
    # (intensity, wibble_decay)
    K.FOG: ((1.5, 2.0), (2.0, 2.0), (2.5, 1.7), (2.5, 1.5), (3.0, 1.4)),
    # (image_weight, frost_weight)
    K.FROST: ((1.0, 0.4), (0.8, 0.6), (0.7, 0.7), (0.65, 0.7), (0.6, 0.75)),
    # Snow ladder is ours (the source gives none): (particle_density per px,
    # streak_length px). Density doubles per step.
    K.SNOW: ((0.002, 8), (0.004, 10), (0.008, 12), (0.016, 16), (0.032, 20)),
}


def severity_params(kind: CorruptionKind, severity: int):
    """Ladder entry for ``kind`` at ``severity`` (1..5)."""
    check_severity(severity)
    return SEVERITY_TABLES[kind][severity - 1]


def check_severity(severity: int) -> None:
    if severity not in SEVERITIES:
        raise ValueError(f"severity must be in 1..5, got {severity!r}")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ImagePair:
    """Two consecutive frames plus identity and timing.

    ``timestamp_gap`` is 0.1 s for KITTI-FC (10 FPS) and 1/30 s for GoPro-FC.
    """

    frame_a: np.ndarray
    frame_b: np.ndarray
    pair_id: str
    timestamp_gap: float

    def __post_init__(self) -> None:
        if self.frame_a.shape != self.frame_b.shape:
            raise ValueError(
                f"pair {self.pair_id}: frame shapes differ "
                f"{self.frame_a.shape} vs {self.frame_b.shape}"
            )


@dataclass(frozen=True)
class CorruptionSpec:
    """Identity of one corruption application."""

    kind: CorruptionKind
    severity: int
    seed: int

    def __post_init__(self) -> None:
        check_severity(self.severity)
        if not isinstance(self.kind, CorruptionKind):
            raise ValueError(f"unknown corruption kind {self.kind!r}")


def validate_image(img: np.ndarray) -> None:
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"degenerate image shape {img.shape}")


def clamp_image(img: np.ndarray) -> np.ndarray:
    """Clamp intensities into [0, 1]. Idempotent; NaN is an error."""
    if np.isnan(img).any():
        raise ValueError("image contains NaN intensities")
    return np.clip(img, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Deterministic randomness
# ---------------------------------------------------------------------------

_SEED_DOMAIN = b"flowbench-seed-v1"


def derive_seed(global_seed: int, pair_id: str, kind: CorruptionKind, severity: int) -> int:
    """Collision-resistantly mix run seed, pair id, kind and severity.

    Pure function; the value is the first 8 bytes (little-endian) of a
    SHA-256 over a canonical encoding, hence identical on every platform.
    """
    check_severity(severity)
    h = hashlib.sha256()
    h.update(_SEED_DOMAIN)
    h.update(int(global_seed).to_bytes(8, "little", signed=False))
    h.update(pair_id.encode("utf-8"))
    h.update(b"\x00")
    h.update(CorruptionKind(kind).value.encode("ascii"))
    h.update(b"\x00")
    h.update(bytes([severity]))
    return int.from_bytes(h.digest()[:8], "little")


def spawn_rng(seed: int) -> np.random.Generator:
    """Pair-level stream: Philox-4x64 keyed directly by the derived seed."""
    return np.random.Generator(np.random.Philox(key=seed))


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    """Per-frame substream (frame_a: index 0, frame_b: index 1).

    Uses the Philox jump function, which advances the counter by 2**128
    blocks, so frame streams never overlap the pair stream.
    """
    return np.random.Generator(np.random.Philox(key=seed).jumped(frame_index + 1))
