#!/usr/bin/env python3
"""Mean ground-truth flow magnitude over a benchmark manifest.

Independent cross-check for the zero-flow baseline: its EPE must equal this
number. Deliberately uses its own scalar per-pixel loops (no shared code
with the metrics module) and only the flow PNG spec:
16-bit channels, u = (c1 - 2^15)/64, v = (c2 - 2^15)/64, c3 = valid.
"""

import json
import math
import struct
import sys
import zlib
from pathlib import Path


def read_flow_png(path):
    """Minimal 16-bit RGB PNG decoder (no filters beyond the PNG spec)."""
    blob = Path(path).read_bytes()
    assert blob[:8] == b"\x89PNG\r\n\x1a\n", f"not a PNG: {path}"
    pos = 8
    idat = b""
    width = height = None
    while pos < len(blob):
        length, ctype = struct.unpack_from(">I4s", blob, pos)
        data = blob[pos + 8 : pos + 8 + length]
        if ctype == b"IHDR":
            width, height, depth, color = struct.unpack_from(">IIBB", data, 0)
            assert depth == 16 and color == 2, "expected 16-bit RGB"
        elif ctype == b"IDAT":
            idat += data
        pos += 12 + length
    raw = zlib.decompress(idat)
    stride = width * 6
    rows = []
    prev = bytearray(stride)
    pos = 0
    for _ in range(height):
        filt = raw[pos]
        line = bytearray(raw[pos + 1 : pos + 1 + stride])
        pos += 1 + stride
        bpp = 6
        if filt == 1:
            for i in range(bpp, stride):
                line[i] = (line[i] + line[i - bpp]) & 0xFF
        elif filt == 2:
            for i in range(stride):
                line[i] = (line[i] + prev[i]) & 0xFF
        elif filt == 3:
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + ((left + prev[i]) >> 1)) & 0xFF
        elif filt == 4:
            for i in range(stride):
                a = line[i - bpp] if i >= bpp else 0
                b = prev[i]
                c = prev[i - bpp] if i >= bpp else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                pred = a if (pa <= pb and pa <= pc) else (b if pb <= pc else c)
                line[i] = (line[i] + pred) & 0xFF
        elif filt != 0:
            raise ValueError(f"unsupported PNG filter {filt}")
        rows.append(bytes(line))
        prev = line
    return width, height, rows


def main() -> None:
    if len(sys.argv) != 2:
        print(f"usage: {sys.argv[0]} <benchmark-dir-or-manifest.json>", file=sys.stderr)
        raise SystemExit(2)
    path = Path(sys.argv[1])
    if path.is_dir():
        path = path / "manifest.json"
    manifest = json.loads(path.read_text())

    per_pair = []
    for pair in manifest["pairs"]:
        gt = pair.get("gt_flow")
        assert gt, f"pair {pair['pair_id']} has no ground truth"
        width, height, rows = read_flow_png(gt)
        total = 0.0
        count = 0
        for row in rows:
            for x in range(width):
                off = x * 6
                c1 = (row[off] << 8) | row[off + 1]
                c2 = (row[off + 2] << 8) | row[off + 3]
                c3 = (row[off + 4] << 8) | row[off + 5]
                if c3 > 0:
                    u = (c1 - 32768) / 64.0
                    v = (c2 - 32768) / 64.0
                    total += math.sqrt(u * u + v * v)
                    count += 1
        assert count > 0, f"pair {pair['pair_id']}: no valid pixels"
        per_pair.append(total / count)

    print(f"{math.fsum(per_pair) / len(per_pair):.10f}")


if __name__ == "__main__":
    main()
