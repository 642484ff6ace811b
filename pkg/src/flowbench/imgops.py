"""Low-level image operations shared by the corruption kernels.

Boundary handling for every convolution is half-sample reflect (edge
duplication: cv2 ``BORDER_REFLECT`` / scipy ``mode="reflect"`` / numpy
``mode="symmetric"``), the variant that conserves total intensity under
symmetric kernels.
"""

from __future__ import annotations

import io
from pathlib import Path

import cv2
import numpy as np
from PIL import Image as PILImage
from scipy import ndimage


# ---------------------------------------------------------------------------
# Quantization and file I/O
# ---------------------------------------------------------------------------


def quantize_u8(img: np.ndarray) -> np.ndarray:
    """Float [0,1] -> uint8 with round-half-up."""
    return np.clip(np.floor(img * 255.0 + 0.5), 0, 255).astype(np.uint8)


def from_u8(img: np.ndarray) -> np.ndarray:
    return (img.astype(np.float32)) / 255.0


def load_image(path: str | Path) -> np.ndarray:
    """Read an 8-bit image file into float32 RGB in [0,1]."""
    raw = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if raw is None:
        raise FileNotFoundError(f"cannot read image: {path}")
    return from_u8(raw[:, :, ::-1])


def save_png(img: np.ndarray, path: str | Path) -> None:
    """Quantize to 8 bits and write a PNG (lossless)."""
    u8 = quantize_u8(img)
    if not cv2.imwrite(str(path), u8[:, :, ::-1]):
        raise OSError(f"failed to write image: {path}")


# ---------------------------------------------------------------------------
# Color space
# ---------------------------------------------------------------------------


def rgb_to_hsv(img: np.ndarray) -> np.ndarray:
    """Vectorized hexcone RGB->HSV, all channels in [0,1]."""
    img = np.asarray(img, dtype=np.float64)
    v = img.max(axis=-1)
    delta = v - img.min(axis=-1)
    s = np.where(v > 0, delta / np.where(v > 0, v, 1.0), 0.0)

    safe = np.where(delta > 0, delta, 1.0)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    h = np.zeros_like(v)
    rmax = (v == r) & (delta > 0)
    gmax = (v == g) & (delta > 0) & ~rmax
    bmax = (delta > 0) & ~rmax & ~gmax
    h = np.where(rmax, ((g - b) / safe) % 6.0, h)
    h = np.where(gmax, (b - r) / safe + 2.0, h)
    h = np.where(bmax, (r - g) / safe + 4.0, h)
    return np.stack([h / 6.0, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    hsv = np.asarray(hsv, dtype=np.float64)
    h = (hsv[..., 0] % 1.0) * 6.0
    s, v = hsv[..., 1], hsv[..., 2]
    i = np.floor(h).astype(int) % 6
    f = h - np.floor(h)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    choices = [
        (v, t, p),
        (q, v, p),
        (p, v, t),
        (p, q, v),
        (t, p, v),
        (v, p, q),
    ]
    r = np.select([i == k for k in range(6)], [c[0] for c in choices])
    g = np.select([i == k for k in range(6)], [c[1] for c in choices])
    b = np.select([i == k for k in range(6)], [c[2] for c in choices])
    return np.stack([r, g, b], axis=-1)


def map_hsv_value(img: np.ndarray, fn) -> np.ndarray:
    """Apply ``fn`` to the HSV value channel and convert back (no clamp)."""
    hsv = rgb_to_hsv(img)
    hsv[..., 2] = fn(hsv[..., 2])
    return hsv_to_rgb(hsv)


# ---------------------------------------------------------------------------
# Resampling and convolution
# ---------------------------------------------------------------------------


def box_downsample(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Area-average (box filter) downsample."""
    return cv2.resize(np.ascontiguousarray(img), (out_w, out_h), interpolation=cv2.INTER_AREA)


def nearest_upsample(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    return cv2.resize(np.ascontiguousarray(img), (out_w, out_h), interpolation=cv2.INTER_NEAREST)


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian with reflect boundary, computed in float64."""
    out = ndimage.gaussian_filter(
        img.astype(np.float64), sigma=(sigma, sigma, 0.0), mode="reflect"
    )
    return out


def filter2d(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Per-channel 2D correlation with reflect boundary, in float64.

    Accepts (H, W) or (H, W, C). All kernels used here are built for
    correlation semantics.
    """
    out = cv2.filter2D(
        np.ascontiguousarray(img, dtype=np.float64),
        -1,
        kernel.astype(np.float64),
        borderType=cv2.BORDER_REFLECT,
    )
    return out


def disk_kernel(radius: int) -> np.ndarray:
    """Normalized circular mean filter of integer radius."""
    if radius < 1:
        raise ValueError("disk radius must be >= 1")
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    k = ((xx * xx + yy * yy) <= radius * radius).astype(np.float64)
    return k / k.sum()


def line_kernel(alpha: int, sigma: float | None, theta: float) -> np.ndarray:
    """Oriented motion-blur kernel.

    A line of length ``2*alpha + 1`` along direction ``theta``, sampled at
    unit steps, Gaussian-weighted along the line with std ``sigma`` (uniform
    when ``sigma`` is None), splatted bilinearly for anti-aliasing, and
    normalized to sum 1.
    """
    size = 2 * alpha + 1
    k = np.zeros((size, size), dtype=np.float64)
    c, s = np.cos(theta), np.sin(theta)
    for t in range(-alpha, alpha + 1):
        w = 1.0 if sigma is None else np.exp(-0.5 * (t / sigma) ** 2)
        x = alpha + t * c
        y = alpha + t * s
        x0, y0 = int(np.floor(x)), int(np.floor(y))
        fx, fy = x - x0, y - y0
        for dy in (0, 1):
            for dx in (0, 1):
                yy, xx = y0 + dy, x0 + dx
                if 0 <= yy < size and 0 <= xx < size:
                    wy = fy if dy else 1.0 - fy
                    wx = fx if dx else 1.0 - fx
                    k[yy, xx] += w * wy * wx
    return k / k.sum()


def remap_bilinear(img: np.ndarray, map_x: np.ndarray, map_y: np.ndarray) -> np.ndarray:
    """out(y, x) = img(map_y(y,x), map_x(y,x)), bilinear, reflect boundary."""
    return cv2.remap(
        np.ascontiguousarray(img, dtype=np.float32),
        map_x.astype(np.float32),
        map_y.astype(np.float32),
        interpolation=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_REFLECT,
    )


# ---------------------------------------------------------------------------
# JPEG round trip
# ---------------------------------------------------------------------------

#: Frozen encoder settings: baseline (non-progressive) JPEG, 4:2:0 chroma
#: subsampling. Required for golden stability.
_JPEG_KWARGS = dict(format="JPEG", subsampling=2, progressive=False, optimize=False)


def jpeg_round_trip(img: np.ndarray, quality: int) -> np.ndarray:
    buf = io.BytesIO()
    PILImage.fromarray(quantize_u8(img)).save(buf, quality=quality, **_JPEG_KWARGS)
    buf.seek(0)
    decoded = np.asarray(PILImage.open(buf).convert("RGB"))
    return from_u8(decoded)
