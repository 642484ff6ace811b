#!/usr/bin/env python3
"""Regenerate the bundled natural-looking test image (data/test_image.png).

Deterministic: smooth sky gradient, a few geometric structures, and seeded
multi-octave texture, 320x240. The image only needs enough structure that
blur/noise severity ladders produce measurably increasing distortion.
"""

import sys
from pathlib import Path

import cv2
import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from flowbench import imgops, spawn_rng  # noqa: E402

WIDTH, HEIGHT = 320, 240
SEED = 0x5EED_1A6E


def octave_noise(rng, height, width, octaves=5):
    acc = np.zeros((height, width), dtype=np.float64)
    total = 0.0
    for o in range(octaves):
        cells = 3 * 2**o
        grid = rng.random((cells + 1, cells + 1)).astype(np.float32)
        layer = cv2.resize(grid, (width, height), interpolation=cv2.INTER_CUBIC)
        acc += 0.55**o * layer.astype(np.float64)
        total += 0.55**o
    return acc / total


def main() -> None:
    rng = spawn_rng(SEED)
    ys, xs = np.mgrid[0:HEIGHT, 0:WIDTH].astype(np.float64)
    ys /= HEIGHT - 1
    xs /= WIDTH - 1

    sky = np.stack(
        [0.35 + 0.25 * (1 - ys), 0.55 + 0.25 * (1 - ys), 0.75 + 0.2 * (1 - ys)], axis=-1
    )
    img = sky.copy()

    # rolling ground
    horizon = 0.55 + 0.08 * np.sin(xs * 7.3) * np.cos(xs * 2.1)
    ground = ys > horizon
    grass = np.stack(
        [0.22 + 0.1 * ys, 0.42 + 0.15 * ys, 0.18 + 0.06 * ys], axis=-1
    )
    img[ground] = grass[ground]

    # a building block and a pole-ish structure
    img[60:150, 40:110] = np.array([0.55, 0.5, 0.45])
    img[75:150, 52:58] = np.array([0.3, 0.28, 0.26])
    img[75:150, 92:98] = np.array([0.3, 0.28, 0.26])
    img[60:66, 40:110] = np.array([0.7, 0.35, 0.3])
    cv2.circle(img, (240, 70), 24, (0.95, 0.9, 0.65), -1)

    # texture everywhere, stronger on the ground
    tex = octave_noise(rng, HEIGHT, WIDTH)
    strength = np.where(ground, 0.22, 0.08)
    img += ((tex - 0.5) * strength)[..., None] * np.array([1.0, 1.0, 0.9])

    # fine detail so blur kernels have something to destroy
    detail = rng.standard_normal((HEIGHT, WIDTH)) * 0.02
    img += detail[..., None]

    # vignette
    r2 = (xs - 0.5) ** 2 + (ys - 0.5) ** 2
    img *= (1.0 - 0.25 * r2)[..., None]

    out = Path(__file__).resolve().parents[1] / "data" / "test_image.png"
    out.parent.mkdir(parents=True, exist_ok=True)
    imgops.save_png(np.clip(img, 0, 1).astype(np.float32), out)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
