"""Per-image corruption kernels (digital, static illumination, noise, blur).

Every kernel is dimension-preserving, clamps its output into [0, 1], and is
a pure function of ``(image, severity, rng state)``.
"""

from __future__ import annotations

import numpy as np

from .core import CorruptionKind as K
from .core import clamp_image, severity_params
from . import imgops


def apply_contrast(img: np.ndarray, severity: int) -> np.ndarray:
    c = severity_params(K.CONTRAST, severity)
    mean = float(img.mean())  # one scalar over all pixels and channels
    return clamp_image((img - mean) * c + mean).astype(np.float32)


def apply_saturate(img: np.ndarray, severity: int) -> np.ndarray:
    alpha, beta = severity_params(K.SATURATE, severity)
    hsv = imgops.rgb_to_hsv(img)
    hsv[..., 1] = np.clip(hsv[..., 1] * alpha + beta, 0.0, 1.0)
    return clamp_image(imgops.hsv_to_rgb(hsv)).astype(np.float32)


def apply_light_shift(img: np.ndarray, severity: int, direction: str) -> np.ndarray:
    """High-light / low-light: shift the HSV value channel by +-c."""
    c = severity_params(K.HIGH_LIGHT, severity)
    if direction == "low":
        c = -c
    elif direction != "high":
        raise ValueError(f"direction must be 'high' or 'low', got {direction!r}")
    out = imgops.map_hsv_value(img, lambda v: np.clip(v + c, 0.0, 1.0))
    return clamp_image(out).astype(np.float32)


def apply_jpeg(img: np.ndarray, severity: int) -> np.ndarray:
    quality = severity_params(K.JPEG, severity)
    return imgops.jpeg_round_trip(img, quality).astype(np.float32)


def apply_pixelate(img: np.ndarray, severity: int) -> np.ndarray:
    scale = severity_params(K.PIXELATE, severity)
    h, w = img.shape[:2]
    w2 = max(1, int(round(w * scale)))
    h2 = max(1, int(round(h * scale)))
    small = imgops.box_downsample(img, w2, h2)
    return clamp_image(imgops.nearest_upsample(small, w, h)).astype(np.float32)


def apply_noise(img: np.ndarray, severity: int, kind: str, rng: np.random.Generator) -> np.ndarray:
    if kind == "gaussian":
        c = severity_params(K.GAUSSIAN_NOISE, severity)
        out = img + c * rng.standard_normal(img.shape)
    elif kind == "shot":
        c = severity_params(K.SHOT_NOISE, severity)
        out = rng.poisson(img * c) / c
    elif kind == "impulse":
        ratio = severity_params(K.IMPULSE_NOISE, severity)
        h, w = img.shape[:2]
        replaced = rng.random((h, w)) < ratio
        # 0 or 1 with equal probability, channels replaced jointly
        value = rng.integers(0, 2, size=(h, w)).astype(img.dtype)
        out = np.where(replaced[..., None], value[..., None], img)
    else:
        raise ValueError(f"unknown noise kind {kind!r}")
    return clamp_image(out).astype(np.float32)


def apply_static_blur(
    img: np.ndarray, severity: int, kind: str, rng: np.random.Generator | None = None
) -> np.ndarray:
    if kind == "gaussian":
        sigma = severity_params(K.GAUSSIAN_BLUR, severity)
        out = imgops.gaussian_blur(img, sigma)
    elif kind == "defocus":
        radius = severity_params(K.DEFOCUS_BLUR, severity)
        out = imgops.filter2d(img, imgops.disk_kernel(radius))
    elif kind == "glass":
        if rng is None:
            raise ValueError("glass blur requires an rng")
        sigma, alpha, beta = severity_params(K.GLASS_BLUR, severity)
        out = imgops.gaussian_blur(img, sigma).astype(np.float32)
        h, w = out.shape[:2]
        # One (dy, dx) draw per pixel per iteration, all up front, so the
        # sequential swap loop stays a pure function of the rng seed.
        offsets = rng.integers(-alpha, alpha + 1, size=(beta, h, w, 2), dtype=np.int64)
        out = _glass_shuffle(out, offsets)
    else:
        raise ValueError(f"unknown blur kind {kind!r}")
    return clamp_image(out).astype(np.float32)


def _glass_shuffle(img: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    from numba import njit

    global _glass_shuffle_jit
    if _glass_shuffle_jit is None:

        @njit(cache=True)
        def _kernel(img, offsets):  # pragma: no cover - exercised via wrapper
            iters, h, w, _ = offsets.shape
            for it in range(iters):
                for y in range(h):
                    for x in range(w):
                        yy = y + offsets[it, y, x, 0]
                        xx = x + offsets[it, y, x, 1]
                        if 0 <= yy < h and 0 <= xx < w:
                            for ch in range(img.shape[2]):
                                tmp = img[y, x, ch]
                                img[y, x, ch] = img[yy, xx, ch]
                                img[yy, xx, ch] = tmp
            return img

        _glass_shuffle_jit = _kernel
    return _glass_shuffle_jit(np.ascontiguousarray(img), offsets)


_glass_shuffle_jit = None


def elastic_offsets(
    height: int, width: int, severity: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel remap offsets (dx, dy).

    dx ~ a*N(U(-0.05H, 0.05H), (0.01W)^2) and
    dy ~ a*N(U(-0.05H, 0.05H), (0.01H)^2); the uniform draw fixes the mean
    once per image per axis.
    """
    a = severity_params(K.ELASTIC_TRANSFORM, severity)
    mu_x = rng.uniform(-0.05 * height, 0.05 * height)
    mu_y = rng.uniform(-0.05 * height, 0.05 * height)
    dx = a * rng.normal(mu_x, 0.01 * width, size=(height, width))
    dy = a * rng.normal(mu_y, 0.01 * height, size=(height, width))
    return dx, dy


def apply_elastic(img: np.ndarray, severity: int, rng: np.random.Generator) -> np.ndarray:
    """Random per-pixel remap with bilinear interpolation, reflect boundary."""
    h, w = img.shape[:2]
    dx, dy = elastic_offsets(h, w, severity, rng)
    xs, ys = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    out = imgops.remap_bilinear(img, xs + dx, ys + dy)
    return clamp_image(out).astype(np.float32)
