"""Pair-level corruption semantics.

Asymmetric exposure (second frame only), shared-direction camera motion
blur, weather overlays shared across the pair, temporally coherent snow
(shared fall direction, per-frame particles), and object motion blur by
frame accumulation.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .core import CorruptionKind as K
from .core import ImagePair, clamp_image, severity_params
from . import imgops


# ---------------------------------------------------------------------------
# Exposure
# ---------------------------------------------------------------------------


def apply_exposure_pair(pair: ImagePair, severity: int, direction: str) -> ImagePair:
    """Mis-expose frame_b by scaling its HSV value channel with 2**ev.

    frame_a is returned untouched (bit-identical).
    """
    if direction == "over":
        ev = severity_params(K.OVER_EXPOSURE, severity)
    elif direction == "under":
        ev = severity_params(K.UNDER_EXPOSURE, severity)
    else:
        raise ValueError(f"direction must be 'over' or 'under', got {direction!r}")
    gain = 2.0**ev
    frame_b = imgops.map_hsv_value(pair.frame_b, lambda v: np.clip(v * gain, 0.0, 1.0))
    frame_b = clamp_image(frame_b).astype(np.float32)
    return ImagePair(pair.frame_a, frame_b, pair.pair_id, pair.timestamp_gap)


# ---------------------------------------------------------------------------
# Camera motion blur
# ---------------------------------------------------------------------------


def apply_camera_motion_pair(
    pair: ImagePair, severity: int, rng: np.random.Generator
) -> ImagePair:
    """Blur both frames with one oriented line kernel (shared direction)."""
    alpha, sigma = severity_params(K.CAMERA_MOTION_BLUR, severity)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    kernel = imgops.line_kernel(alpha, sigma, theta)

    def blur(img):
        return clamp_image(imgops.filter2d(img, kernel)).astype(np.float32)

    return ImagePair(blur(pair.frame_a), blur(pair.frame_b), pair.pair_id, pair.timestamp_gap)


# ---------------------------------------------------------------------------
# Weather overlays (shared across the pair)
# ---------------------------------------------------------------------------


def plasma_fractal(size: int, wibble_decay: float, rng: np.random.Generator) -> np.ndarray:
    """Diamond-square heightmap on a power-of-two grid, normalized to [0,1]."""
    if size & (size - 1):
        raise ValueError(f"plasma size must be a power of two, got {size}")
    arr = np.zeros((size, size), dtype=np.float64)
    step = size
    wibble = 100.0

    def wibbled(mean4):
        return mean4 / 4.0 + rng.uniform(-wibble, wibble, mean4.shape)

    while step >= 2:
        half = step // 2
        corners = arr[0:size:step, 0:size:step]
        acc = corners + np.roll(corners, -1, axis=0)
        acc = acc + np.roll(acc, -1, axis=1)
        arr[half::step, half::step] = wibbled(acc)

        centers = arr[half::step, half::step]
        up = centers + np.roll(centers, 1, axis=0)
        left = centers + np.roll(centers, 1, axis=1)
        corners2 = corners + np.roll(corners, -1, axis=1)
        corners3 = corners + np.roll(corners, -1, axis=0)
        arr[0:size:step, half::step] = wibbled(up + corners2)
        arr[half::step, 0:size:step] = wibbled(left + corners3)

        step = half
        wibble /= wibble_decay

    arr -= arr.min()
    peak = arr.max()
    return arr / peak if peak > 0 else arr


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def spatter_overlay(
    height: int, width: int, severity: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Occlusion overlay: (alpha map in [0,1], RGB overlay color).

    Blobs come from thresholding a Gaussian-blurred noise field at the
    quantile matching the ladder's occlusion fraction, so the occluded-area
    fraction tracks the ladder exactly. Lower severities render water
    droplets, the top ones mud.
    """
    fraction, blur_sigma, mud = severity_params(K.SPATTER, severity)
    field = ndimage.gaussian_filter(rng.random((height, width)), blur_sigma, mode="reflect")
    threshold = np.quantile(field, 1.0 - fraction)
    mask = field > threshold
    opacity = 0.9 if mud else 0.75
    alpha = mask.astype(np.float64) * opacity
    color = np.array([0.35, 0.26, 0.16]) if mud else np.array([0.65, 0.75, 0.88])
    return alpha, color


def _bilinear_up(grid: np.ndarray, width: int, height: int) -> np.ndarray:
    import cv2

    return cv2.resize(grid, (width, height), interpolation=cv2.INTER_LINEAR).astype(np.float64)


def frost_texture(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    """Procedural frost layer (RGB): ridged fractal noise with icy streaks.

    Stand-in for the photographic frost assets of the single-image corruption
    suite, which are not redistributable.
    """
    noise = np.zeros((height, width), dtype=np.float64)
    total = 0.0
    for octave in range(4):
        weight = 0.5**octave
        noise += weight * _bilinear_up(
            rng.random((4 * 2**octave + 1, 4 * 2**octave + 1)).astype(np.float32), width, height
        )
        total += weight
    noise /= total
    ridged = 1.0 - np.abs(2.0 * noise - 1.0)
    crystal = ridged**3
    streaks = np.zeros_like(crystal)
    for _ in range(2):
        theta = rng.uniform(0.0, np.pi)
        streaks += imgops.filter2d(crystal, imgops.line_kernel(4, None, theta))
    tex = np.clip(0.6 * crystal + 0.2 * streaks, 0.0, 1.0)
    tint = np.array([0.9, 0.95, 1.0])
    return tex[..., None] * tint


def apply_weather_pair(
    pair: ImagePair, severity: int, kind: str, rng: np.random.Generator
) -> ImagePair:
    """Spatter / fog / frost: one overlay per pair, blended into both frames."""
    h, w = pair.frame_a.shape[:2]
    if kind == "spatter":
        alpha, color = spatter_overlay(h, w, severity, rng)

        def treat(img):
            return img * (1.0 - alpha[..., None]) + alpha[..., None] * color

    elif kind == "fog":
        intensity, wibble_decay = severity_params(K.FOG, severity)
        plasma = plasma_fractal(_next_pow2(max(h, w)), wibble_decay, rng)[:h, :w]
        # Shared scalar so both frames get the identical affine treatment.
        max_val = max(float(pair.frame_a.max()), float(pair.frame_b.max()), 1e-6)

        def treat(img):
            return (img + intensity * plasma[..., None]) * max_val / (max_val + intensity)

    elif kind == "frost":
        img_w, frost_w = severity_params(K.FROST, severity)
        frost = frost_texture(h, w, rng)

        def treat(img):
            return img_w * img + frost_w * frost

    else:
        raise ValueError(f"unknown weather kind {kind!r}")

    frame_a = clamp_image(treat(pair.frame_a)).astype(np.float32)
    frame_b = clamp_image(treat(pair.frame_b)).astype(np.float32)
    return ImagePair(frame_a, frame_b, pair.pair_id, pair.timestamp_gap)


# ---------------------------------------------------------------------------
# Snow (shared fall direction, particles regenerated per frame)
# ---------------------------------------------------------------------------


def snow_overlay(
    height: int, width: int, severity: int, theta: float, rng: np.random.Generator
) -> np.ndarray:
    """Alpha map of motion-blurred snow streaks along direction ``theta``."""
    density, length = severity_params(K.SNOW, severity)
    count = max(1, int(round(density * height * width)))
    ys = rng.uniform(0, height - 1, size=count)
    xs = rng.uniform(0, width - 1, size=count)
    brightness = rng.uniform(0.6, 1.0, size=count)
    canvas = np.zeros((height, width), dtype=np.float64)
    yi = ys.astype(int)
    xi = xs.astype(int)
    np.add.at(canvas, (yi, xi), brightness)
    half = max(1, length // 2)
    streaked = imgops.filter2d(canvas, imgops.line_kernel(half, None, theta))
    return np.clip(streaked * (2 * half + 1) * 0.75, 0.0, 0.9)


def snow_direction(rng: np.random.Generator) -> float:
    """Fall direction, drawn once per pair: downward-ish, in radians."""
    return rng.uniform(np.radians(45.0), np.radians(135.0))


def apply_snow_pair(pair: ImagePair, severity: int, rng: np.random.Generator) -> ImagePair:
    h, w = pair.frame_a.shape[:2]
    theta = snow_direction(rng)

    def treat(img):
        alpha = snow_overlay(h, w, severity, theta, rng)
        gray = img.mean(axis=-1, keepdims=True)
        boosted = 0.85 * img + 0.15 * np.maximum(img, gray * 1.5 + 0.3)
        out = boosted * (1.0 - alpha[..., None]) + alpha[..., None] * 0.95
        return clamp_image(out).astype(np.float32)

    # Sequential draws: frame_a's particles, then frame_b's, so the particle
    # sets are independent while the direction stays shared.
    frame_a = treat(pair.frame_a)
    frame_b = treat(pair.frame_b)
    return ImagePair(frame_a, frame_b, pair.pair_id, pair.timestamp_gap)


# ---------------------------------------------------------------------------
# Object motion blur by frame accumulation
# ---------------------------------------------------------------------------


def accumulate_window(frames, index: int, half_width: int) -> np.ndarray:
    """Arithmetic mean of frames[index-half_width : index+half_width+1]."""
    n = len(frames)
    if index - half_width < 0 or index + half_width >= n:
        raise IndexError(
            f"accumulation window [{index - half_width}, {index + half_width}] out of "
            f"bounds for keyframe {index} (sequence length {n})"
        )
    acc = np.zeros(frames[index].shape, dtype=np.float64)
    for j in range(index - half_width, index + half_width + 1):
        acc += frames[j]
    return clamp_image(acc / (2 * half_width + 1)).astype(np.float32)


def accumulate_window_reflected(frames, index: int, half_width: int) -> np.ndarray:
    """Like :func:`accumulate_window` but reflecting indices at the sequence
    ends, so benchmark keyframes near the boundary stay usable."""
    n = len(frames)
    acc = np.zeros(frames[index].shape, dtype=np.float64)
    for j in range(index - half_width, index + half_width + 1):
        r = j
        if r < 0:
            r = -r
        if r >= n:
            r = 2 * (n - 1) - r
        acc += frames[r]
    return clamp_image(acc / (2 * half_width + 1)).astype(np.float32)


def synthesize_object_motion_pair(
    frames_960fps, keyframe_a: int, keyframe_b: int, severity: int, *, pair_id: str = ""
) -> ImagePair:
    """Accumulate high-FPS frames around both keyframes of a 30 FPS pair."""
    c = severity_params(K.OBJECT_MOTION_BLUR, severity)
    frame_a = accumulate_window(frames_960fps, keyframe_a, c)
    frame_b = accumulate_window(frames_960fps, keyframe_b, c)
    return ImagePair(frame_a, frame_b, pair_id, 1.0 / 30.0)
