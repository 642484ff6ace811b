#!/usr/bin/env python3
"""Generate a synthetic mini KITTI-FC benchmark for demos and integration tests.

Writes a KITTI-2015-style layout (200 tiny pairs with 16-bit flow ground
truth) plus a planned KITTI-FC eval manifest. No real dataset needed; useful
for exercising runners and the evaluator end-to-end.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from flowbench import datasets, flowio, imgops, spawn_rng  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir")
    parser.add_argument("--width", type=int, default=48)
    parser.add_argument("--height", type=int, default=32)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--split", choices=["eval", "train"], default="eval")
    args = parser.parse_args()

    out = Path(args.out_dir)
    source = out / "kitti_source"
    rng = spawn_rng(args.seed)
    image_dir = source / "image_2"
    flow_dir = source / "flow_occ"
    image_dir.mkdir(parents=True, exist_ok=True)
    flow_dir.mkdir(parents=True, exist_ok=True)

    h, w = args.height, args.width
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    for i in range(200):
        pid = f"{i:06d}"
        base = 0.5 + 0.3 * np.sin(2 * np.pi * (xs / w + i / 37.0))
        tex = rng.random((h, w, 3))
        frame_a = np.clip(base[..., None] * [1, 0.9, 0.8] + 0.15 * (tex - 0.5), 0, 1)
        frame_b = np.roll(frame_a, 2, axis=1)
        imgops.save_png(frame_a.astype(np.float32), image_dir / f"{pid}_10.png")
        imgops.save_png(frame_b.astype(np.float32), image_dir / f"{pid}_11.png")
        flow = rng.uniform(-25, 25, size=(h, w, 2)).astype(np.float32)
        valid = rng.random((h, w)) < 0.8
        valid[0, 0] = True
        flowio.write_kitti_png(flow, flow_dir / f"{pid}_10.png", valid)

    manifest = datasets.plan_kitti_fc(source, args.split, args.seed)
    # kinds=[] materializes only the clean frames; corrupted cells can be
    # filled in later with `flowbench corrupt`
    datasets.materialize(manifest, out, kinds=[])
    print(f"benchmark manifest: {out / 'manifest.json'} ({len(manifest['pairs'])} pairs)")


if __name__ == "__main__":
    main()
