"""Spatially varying optical blur from per-lens PSF kernel grids.

A lens is a grid of K x K kernels indexed by normalized field position
(x, y) in [0,1]^2, nodes spread uniformly with the corners included. The
effective kernel at a pixel is the bilinear blend of the 4 surrounding grid
kernels; because convolution is linear in the kernel, the image is computed
by overlap-add: convolve per grid kernel over its support tile and blend the
results with the bilinear hat weights (a partition of unity).

File format ``PSFG1`` (little-endian):
    magic "PSFG1" | u32 G_x | u32 G_y | u32 K | f32 pixel_pitch_um |
    f32 rms_radius_um | G_y*G_x*K*K f32 payload, row-major,
    grid-then-kernel order.

The five built-in lenses are synthetic stand-ins: seeded Zernike-style
aberration sums (a defocus ring plus field-dependent aberration lobes)
calibrated so the measured RMS spot radius matches the severity ladder
(0.0296/0.0832/0.1102/0.1588/0.1939 mm at 4 um pixel pitch) within 5%.
"""

from __future__ import annotations

import functools
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .core import CorruptionKind as K
from .core import SEVERITY_TABLES, check_severity, clamp_image

MAGIC = b"PSFG1"
_HEADER = struct.Struct("<IIIff")

PIXEL_PITCH_UM = 4.0
LENS_RMS_MM = SEVERITY_TABLES[K.PSF_BLUR]


class PsfFormatError(ValueError):
    """Raised for malformed or invalid PSF grid files."""


@dataclass(frozen=True)
class PsfGrid:
    lens_id: str
    rms_radius_mm: float
    pixel_pitch_um: float
    kernels: np.ndarray  # (G_y, G_x, K, K) float64, each kernel sums to 1

    @property
    def kernel_size(self) -> int:
        return self.kernels.shape[-1]

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.kernels.shape[0], self.kernels.shape[1]


def _validate_kernels(kernels: np.ndarray, origin: str) -> np.ndarray:
    gy, gx, kh, kw = kernels.shape
    if gx < 2 or gy < 2:
        raise PsfFormatError(f"{origin}: grid must be at least 2x2, got {gx}x{gy}")
    if kh != kw or kh % 2 == 0:
        raise PsfFormatError(f"{origin}: kernels must be odd and square, got {kh}x{kw}")
    if (kernels < 0).any():
        raise PsfFormatError(f"{origin}: kernel contains negative weights")
    sums = kernels.sum(axis=(2, 3))
    if (sums <= 0).any():
        raise PsfFormatError(f"{origin}: kernel with zero total weight")
    return kernels / sums[:, :, None, None]


def save_psf_grid(grid: PsfGrid, path: str | Path) -> None:
    gy, gx = grid.grid_shape
    k = grid.kernel_size
    payload = np.ascontiguousarray(grid.kernels, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(
            _HEADER.pack(gx, gy, k, grid.pixel_pitch_um, grid.rms_radius_mm * 1000.0)
        )
        fh.write(payload.tobytes())


def load_psf_grid(path: str | Path) -> PsfGrid:
    path = Path(path)
    blob = path.read_bytes()
    if blob[: len(MAGIC)] != MAGIC:
        raise PsfFormatError(f"{path}: bad magic, not a PSFG1 file")
    off = len(MAGIC)
    if len(blob) < off + _HEADER.size:
        raise PsfFormatError(f"{path}: truncated header")
    gx, gy, k, pitch_um, rms_um = _HEADER.unpack_from(blob, off)
    off += _HEADER.size
    expected = gy * gx * k * k * 4
    if len(blob) - off != expected:
        raise PsfFormatError(
            f"{path}: payload size {len(blob) - off} != expected {expected} bytes"
        )
    kernels = (
        np.frombuffer(blob, dtype="<f4", count=gy * gx * k * k, offset=off)
        .astype(np.float64)
        .reshape(gy, gx, k, k)
    )
    kernels = _validate_kernels(kernels, str(path))
    return PsfGrid(
        lens_id=path.stem,
        rms_radius_mm=rms_um / 1000.0,
        pixel_pitch_um=pitch_um,
        kernels=kernels,
    )


def make_psf_grid(
    lens_id: str, rms_radius_mm: float, kernels: np.ndarray, pixel_pitch_um: float = PIXEL_PITCH_UM
) -> PsfGrid:
    """Build a grid from raw kernels, applying the same validation as load."""
    kernels = _validate_kernels(np.asarray(kernels, dtype=np.float64), lens_id)
    return PsfGrid(lens_id, rms_radius_mm, pixel_pitch_um, kernels)


# ---------------------------------------------------------------------------
# Spatially varying convolution
# ---------------------------------------------------------------------------


def _hat_weights(n_pixels: int, nodes: np.ndarray, j: int) -> np.ndarray:
    """Bilinear hat weight of grid node j over pixel coordinates 0..n-1."""
    px = np.arange(n_pixels, dtype=np.float64)
    if j == 0:
        xp, fp = [nodes[0], nodes[1]], [1.0, 0.0]
    elif j == len(nodes) - 1:
        xp, fp = [nodes[-2], nodes[-1]], [0.0, 1.0]
    else:
        xp, fp = [nodes[j - 1], nodes[j], nodes[j + 1]], [0.0, 1.0, 0.0]
    return np.interp(px, xp, fp)


def _conv_region(img: np.ndarray, kernel: np.ndarray, y0, y1, x0, x1) -> np.ndarray:
    """True convolution over rows y0..y1 / cols x0..x1 (inclusive), reflect
    boundary taken with respect to the full image borders.

    PSF kernels are asymmetric, so the kernel is flipped to turn cv2's
    correlation into convolution (a delta image reproduces the kernel
    unflipped).
    """
    r = kernel.shape[0] // 2
    h, w = img.shape[:2]
    ya, yb = y0 - r, y1 + 1 + r
    xa, xb = x0 - r, x1 + 1 + r
    crop = img[max(0, ya) : min(h, yb), max(0, xa) : min(w, xb)]
    pads = (
        (max(0, -ya), max(0, yb - h)),
        (max(0, -xa), max(0, xb - w)),
        (0, 0),
    )
    if any(p != (0, 0) for p in pads[:2]):
        crop = np.pad(crop, pads, mode="symmetric")
    flipped = np.ascontiguousarray(kernel[::-1, ::-1])
    out = cv2.filter2D(crop, -1, flipped, borderType=cv2.BORDER_REFLECT)
    return out[r : r + (y1 - y0 + 1), r : r + (x1 - x0 + 1)]


def convolve_spatially_varying(img: np.ndarray, grid: PsfGrid, clamp: bool = True) -> np.ndarray:
    h, w = img.shape[:2]
    k = grid.kernel_size
    if h < k or w < k:
        raise ValueError(
            f"image {w}x{h} smaller than PSF kernel {k}x{k} for lens {grid.lens_id}"
        )
    gy, gx = grid.grid_shape
    nodes_x = np.linspace(0.0, w - 1.0, gx)
    nodes_y = np.linspace(0.0, h - 1.0, gy)
    wx = [_hat_weights(w, nodes_x, j) for j in range(gx)]
    wy = [_hat_weights(h, nodes_y, i) for i in range(gy)]

    src = img.astype(np.float64)
    out = np.zeros_like(src)
    for i in range(gy):
        ys = np.nonzero(wy[i] > 0)[0]
        y0, y1 = int(ys[0]), int(ys[-1])
        for j in range(gx):
            xs = np.nonzero(wx[j] > 0)[0]
            x0, x1 = int(xs[0]), int(xs[-1])
            tile = _conv_region(src, grid.kernels[i, j], y0, y1, x0, x1)
            weight = wy[i][y0 : y1 + 1, None] * wx[j][None, x0 : x1 + 1]
            out[y0 : y1 + 1, x0 : x1 + 1] += weight[:, :, None] * tile
    if clamp:
        out = clamp_image(out)
    return out.astype(np.float32)


def apply_psf_blur(img: np.ndarray, severity: int) -> np.ndarray:
    return convolve_spatially_varying(img, builtin_psf_grid(severity))


# ---------------------------------------------------------------------------
# Built-in synthetic lenses
# ---------------------------------------------------------------------------


def measure_rms_radius_px(kernel: np.ndarray) -> float:
    """RMS spot radius about the kernel centroid, in pixels."""
    k = kernel / kernel.sum()
    n = kernel.shape[0]
    axis = np.arange(n, dtype=np.float64)
    xx, yy = np.meshgrid(axis, axis)
    cx = float((k * xx).sum())
    cy = float((k * yy).sum())
    return float(np.sqrt((k * ((xx - cx) ** 2 + (yy - cy) ** 2)).sum()))


def _lens_rng(lens_id: str) -> np.random.Generator:
    digest = hashlib.sha256(b"flowbench-lens-v1" + lens_id.encode()).digest()
    return np.random.Generator(np.random.Philox(key=int.from_bytes(digest[:8], "little")))


def _node_components(rng: np.random.Generator, fx: float, fy: float) -> list[dict]:
    """Aberration mixture for one field position: a defocus ring plus lobes.

    All lengths are relative to the (unit) ring radius and get scaled during
    RMS calibration. Lobe placement and anisotropy follow the field direction
    so kernels vary across the grid the way coma/astigmatism would.
    """
    hfield = min(1.0, np.hypot(fx, fy) / np.sqrt(2.0))
    psi = np.arctan2(fy, fx)
    comps: list[dict] = [
        {
            "type": "ring",
            "weight": rng.uniform(0.55, 0.75),
            "radius": 1.0 * (1.0 + 0.12 * (hfield**2 - 0.5) * rng.uniform(0.5, 1.5)),
            "sigma": rng.uniform(0.08, 0.13),
            # Astigmatism-like ellipticity grows with field
            "ellipticity": 0.15 * hfield**2 * rng.uniform(0.5, 1.5),
            "angle": psi + rng.normal(0.0, 0.2),
        }
    ]
    for _ in range(3):
        u = rng.uniform(0.10, 0.55)
        ang = psi + rng.normal(0.0, 0.9)
        # Coma-like flare: lobes drift along the field direction with h
        cx = u * np.cos(ang) + 0.15 * hfield * np.cos(psi)
        cy = u * np.sin(ang) + 0.15 * hfield * np.sin(psi)
        comps.append(
            {
                "type": "blob",
                "weight": rng.uniform(0.05, 0.15),
                "cx": cx,
                "cy": cy,
                "sx": rng.uniform(0.08, 0.16) * (1.0 + 0.5 * hfield),
                "sy": rng.uniform(0.08, 0.16),
                "angle": psi + rng.normal(0.0, 0.4),
            }
        )
    return comps


def _rasterize(comps: list[dict], scale: float, half: int) -> np.ndarray:
    axis = np.arange(-half, half + 1, dtype=np.float64)
    xx, yy = np.meshgrid(axis, axis)
    k = np.zeros_like(xx)
    for c in comps:
        ca, sa = np.cos(c["angle"]), np.sin(c["angle"])
        if c["type"] == "ring":
            ex = 1.0 + c["ellipticity"]
            ey = 1.0 - c["ellipticity"]
            xr = (xx * ca + yy * sa) / ex
            yr = (-xx * sa + yy * ca) / ey
            rr = np.hypot(xr, yr)
            k += c["weight"] * np.exp(-0.5 * ((rr - c["radius"] * scale) / (c["sigma"] * scale)) ** 2)
        else:
            dx = xx - c["cx"] * scale
            dy = yy - c["cy"] * scale
            xr = dx * ca + dy * sa
            yr = -dx * sa + dy * ca
            k += c["weight"] * np.exp(
                -0.5 * ((xr / (c["sx"] * scale)) ** 2 + (yr / (c["sy"] * scale)) ** 2)
            )
    return k


def _calibrated_kernel(comps: list[dict], target_rms_px: float) -> tuple[np.ndarray, float]:
    """Scale the mixture so the rasterized RMS radius hits the target."""
    scale = target_rms_px
    for _ in range(4):
        half = int(np.ceil(2.4 * scale + 4))
        k = _rasterize(comps, scale, half)
        measured = measure_rms_radius_px(k)
        scale *= target_rms_px / measured
    half = int(np.ceil(2.4 * scale + 4))
    k = _rasterize(comps, scale, half)
    return k, measure_rms_radius_px(k)


def _trim_half(kernel: np.ndarray, keep: float = 1e-4) -> int:
    """Smallest half-width about the center containing all mass > keep*peak."""
    half = kernel.shape[0] // 2
    mask = kernel > keep * kernel.max()
    ys, xs = np.nonzero(mask)
    extent = max(np.abs(ys - half).max(), np.abs(xs - half).max())
    return int(extent)


@functools.lru_cache(maxsize=8)
def builtin_psf_grid(severity: int, grid_shape: tuple[int, int] = (4, 4)) -> PsfGrid:
    """Deterministic synthetic lens for the given severity (cached)."""
    check_severity(severity)
    rms_mm = LENS_RMS_MM[severity - 1]
    target_px = rms_mm * 1000.0 / PIXEL_PITCH_UM
    lens_id = f"builtin_lens_s{severity}"
    rng = _lens_rng(lens_id)
    gy, gx = grid_shape
    raw: list[list[np.ndarray]] = []
    for i in range(gy):
        row = []
        for j in range(gx):
            fx = 2.0 * (j / (gx - 1)) - 1.0
            fy = 2.0 * (i / (gy - 1)) - 1.0
            comps = _node_components(rng, fx, fy)
            kernel, _ = _calibrated_kernel(comps, target_px)
            row.append(kernel)
        raw.append(row)

    half = max(_trim_half(k) for row in raw for k in row)
    size = 2 * half + 1
    kernels = np.zeros((gy, gx, size, size), dtype=np.float64)
    for i in range(gy):
        for j in range(gx):
            k = raw[i][j]
            c = k.shape[0] // 2
            take = min(c, half)
            kernels[
                i, j, half - take : half + take + 1, half - take : half + take + 1
            ] = k[c - take : c + take + 1, c - take : c + take + 1]
    return make_psf_grid(lens_id, rms_mm, kernels)


def materialize_builtin_grids(out_dir: str | Path) -> list[Path]:
    """Write the five built-in lenses as PSFG1 files; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for severity in range(1, 6):
        grid = builtin_psf_grid(severity)
        path = out_dir / f"{grid.lens_id}.psfg"
        save_psf_grid(grid, path)
        paths.append(path)
    return paths
