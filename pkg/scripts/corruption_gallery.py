#!/usr/bin/env python3
"""Render every frame-level corruption on the bundled test image.

Writes a <kind>_s<severity>.png per cell plus a contact-sheet montage.
Handy for eyeballing ladders after touching a kernel.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from flowbench import CorruptionKind, ImagePair, corrupt_pair, imgops  # noqa: E402
from flowbench.video import VIDEO_KINDS  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="gallery")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--severities", default="3")
    args = parser.parse_args()

    root = Path(__file__).resolve().parents[1]
    img = imgops.load_image(root / "data" / "test_image.png")
    pair = ImagePair(img, img.copy(), "gallery", 0.1)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    kinds = [
        k
        for k in CorruptionKind
        if k not in VIDEO_KINDS and k is not CorruptionKind.OBJECT_MOTION_BLUR
    ]
    severities = [int(s) for s in args.severities.split(",")]
    tiles = []
    for kind in kinds:
        for severity in severities:
            corrupted = corrupt_pair(pair, kind, severity, args.seed)
            name = f"{kind.value}_s{severity}.png"
            imgops.save_png(corrupted.frame_b, out_dir / name)
            tiles.append(corrupted.frame_b)
            print(name)

    cols = 5
    rows = (len(tiles) + cols - 1) // cols
    h, w = img.shape[:2]
    sheet = np.ones((rows * h, cols * w, 3), dtype=np.float32)
    for i, tile in enumerate(tiles):
        r, c = divmod(i, cols)
        sheet[r * h : (r + 1) * h, c * w : (c + 1) * w] = tile
    imgops.save_png(sheet, out_dir / "contact_sheet.png")
    print(f"contact sheet: {out_dir / 'contact_sheet.png'}")


if __name__ == "__main__":
    main()
