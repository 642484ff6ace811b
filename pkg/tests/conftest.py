"""Shared fixtures: the bundled test image and synthetic dataset roots.

The dataset fixtures mimic the real KITTI-2015 / GoPro layouts at tiny
resolution so benchmark construction runs at full pair counts in seconds.
Frames are 48x32 - large enough for the severity-1 PSF lens (K=25).
"""

from pathlib import Path

import cv2
import numpy as np
import pytest

from flowbench import imgops, flowio, spawn_rng

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

FIX_W, FIX_H = 48, 32


@pytest.fixture(scope="session")
def test_image() -> np.ndarray:
    return imgops.load_image(DATA_DIR / "test_image.png")


def _textured_frame(rng, t: float) -> np.ndarray:
    """Small moving scene: drifting gradient + texture, mild temporal noise."""
    ys, xs = np.mgrid[0:FIX_H, 0:FIX_W].astype(np.float64)
    base = 0.5 + 0.3 * np.sin(2 * np.pi * (xs / FIX_W + 0.3 * t)) * np.cos(
        2 * np.pi * (ys / FIX_H - 0.2 * t)
    )
    tex = rng.random((FIX_H, FIX_W))
    img = np.stack([base, 0.8 * base + 0.1, 1.0 - 0.5 * base], axis=-1)
    img += 0.1 * (tex[..., None] - 0.5)
    return np.clip(img, 0, 1).astype(np.float32)


def make_kitti_root(root: Path, n_pairs: int = 200, zero_gt: bool = False, seed: int = 11):
    """Write a KITTI-2015-style flow training layout with tiny images."""
    rng = spawn_rng(seed)
    image_dir = root / "image_2"
    flow_dir = root / "flow_occ"
    image_dir.mkdir(parents=True)
    flow_dir.mkdir(parents=True)
    for i in range(n_pairs):
        pid = f"{i:06d}"
        imgops.save_png(_textured_frame(rng, 0.0), image_dir / f"{pid}_10.png")
        imgops.save_png(_textured_frame(rng, 1.0), image_dir / f"{pid}_11.png")
        if zero_gt:
            flow = np.zeros((FIX_H, FIX_W, 2), dtype=np.float32)
            valid = np.ones((FIX_H, FIX_W), dtype=bool)
        else:
            flow = rng.uniform(-20, 20, size=(FIX_H, FIX_W, 2)).astype(np.float32)
            valid = rng.random((FIX_H, FIX_W)) < 0.8
            valid[0, 0] = True  # every pair keeps at least one valid pixel
        flowio.write_kitti_png(flow, flow_dir / f"{pid}_10.png", valid)
    return root


@pytest.fixture(scope="session")
def kitti_root(tmp_path_factory) -> Path:
    return make_kitti_root(tmp_path_factory.mktemp("kitti"))


@pytest.fixture(scope="session")
def kitti_zero_gt_root(tmp_path_factory) -> Path:
    return make_kitti_root(tmp_path_factory.mktemp("kitti0"), zero_gt=True)


GOPRO_FRAME_COUNT = 1081  # 4*(1081-1)+1 = 4321 interpolated frames -> 135 pairs


def make_gopro_root(root: Path, sequences, n_frames: int = GOPRO_FRAME_COUNT, seed: int = 23):
    """Write GoPro-style 240 FPS sequence directories with tiny frames."""
    for s_idx, seq in enumerate(sequences):
        rng = spawn_rng(seed + s_idx)
        seq_dir = root / seq
        seq_dir.mkdir(parents=True)
        ys, xs = np.mgrid[0:FIX_H, 0:FIX_W].astype(np.float64)
        tex = rng.random((FIX_H, FIX_W, 3))
        for t in range(n_frames):
            phase = t / 240.0
            img = 0.5 + 0.35 * np.sin(2 * np.pi * (xs / FIX_W + phase))[..., None]
            img = img * np.array([1.0, 0.9, 0.8]) + 0.15 * (tex - 0.5)
            img += 0.05 * np.cos(2 * np.pi * (ys / FIX_H - 2 * phase))[..., None]
            imgops.save_png(np.clip(img, 0, 1).astype(np.float32), seq_dir / f"{t:06d}.png")
    return root


@pytest.fixture(scope="session")
def gopro_root(tmp_path_factory) -> Path:
    from flowbench.datasets import GOPRO_SEQUENCES

    return make_gopro_root(tmp_path_factory.mktemp("gopro"), GOPRO_SEQUENCES)


@pytest.fixture()
def small_pair():
    from flowbench import ImagePair

    rng = spawn_rng(3)
    a = rng.random((FIX_H, FIX_W, 3)).astype(np.float32)
    b = np.clip(a + 0.05 * rng.standard_normal(a.shape), 0, 1).astype(np.float32)
    return ImagePair(a, b, "000001_10", 0.1)
