"""Optical-flow file codecs: Middlebury .flo and KITTI 16-bit PNG.

.flo is lossless: magic float 202021.25, int32 width/height, then
interleaved (u, v) float32 row-major. It carries no validity channel, so
reads return an all-valid mask.

KITTI PNG stores per pixel ``u*64 + 2^15`` and ``v*64 + 2^15`` as uint16 in
the first two channels and the valid flag in the third; invalid pixels
decode to zero flow. Quantization is 1/64 px, so a round trip is exact to
1/128 px per component.
"""

from __future__ import annotations

import struct
from pathlib import Path

import cv2
import numpy as np

FLO_MAGIC = 202021.25
FLO_TAG = struct.pack("<f", FLO_MAGIC)

FORMATS = ("middlebury_flo", "kitti_png16")


class FlowFormatError(ValueError):
    """Raised for unparseable flow files or unencodable values."""


def _check_flow(flow: np.ndarray) -> np.ndarray:
    flow = np.asarray(flow)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise FlowFormatError(f"flow must have shape (H, W, 2), got {flow.shape}")
    if not np.isfinite(flow).all():
        raise FlowFormatError("flow contains non-finite components")
    return flow.astype(np.float32)


def write_flo(flow: np.ndarray, path: str | Path) -> None:
    flow = _check_flow(flow)
    h, w = flow.shape[:2]
    with open(path, "wb") as fh:
        fh.write(FLO_TAG)
        fh.write(struct.pack("<ii", w, h))
        fh.write(np.ascontiguousarray(flow, dtype="<f4").tobytes())


def read_flo(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[:4] != FLO_TAG:
        raise FlowFormatError(f"{path}: bad .flo magic")
    w, h = struct.unpack_from("<ii", blob, 4)
    if w < 1 or h < 1:
        raise FlowFormatError(f"{path}: invalid dimensions {w}x{h}")
    expected = 12 + w * h * 2 * 4
    if len(blob) != expected:
        raise FlowFormatError(f"{path}: truncated payload ({len(blob)} != {expected} bytes)")
    flow = np.frombuffer(blob, dtype="<f4", count=w * h * 2, offset=12).reshape(h, w, 2)
    return flow.astype(np.float32), np.ones((h, w), dtype=bool)


def write_kitti_png(
    flow: np.ndarray, path: str | Path, valid: np.ndarray | None = None
) -> None:
    flow = _check_flow(flow)
    h, w = flow.shape[:2]
    if valid is None:
        valid = np.ones((h, w), dtype=bool)
    if valid.shape != (h, w):
        raise FlowFormatError(f"valid mask shape {valid.shape} != flow {(h, w)}")
    raw = np.floor(flow.astype(np.float64) * 64.0 + 2.0**15 + 0.5)
    if ((raw < 0) | (raw > 65535)).any():
        raise FlowFormatError(
            f"{path}: flow out of range for 16-bit KITTI encoding (|component| must be < 512)"
        )
    png = np.zeros((h, w, 3), dtype=np.uint16)
    png[:, :, 0] = np.where(valid, raw[:, :, 0].astype(np.uint16), 0)
    png[:, :, 1] = np.where(valid, raw[:, :, 1].astype(np.uint16), 0)
    png[:, :, 2] = valid.astype(np.uint16)
    # cv2 writes channels in BGR order; reverse so the PNG carries (u, v, valid)
    if not cv2.imwrite(str(path), png[:, :, ::-1]):
        raise OSError(f"failed to write {path}")


def read_kitti_png(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FlowFormatError(f"{path}: cannot read file")
    if raw.ndim != 3 or raw.shape[2] != 3 or raw.dtype != np.uint16:
        raise FlowFormatError(f"{path}: not a 16-bit 3-channel KITTI flow PNG")
    png = raw[:, :, ::-1].astype(np.float64)  # back to (u, v, valid)
    valid = png[:, :, 2] > 0
    flow = (png[:, :, :2] - 2.0**15) / 64.0
    flow[~valid] = 0.0
    return flow.astype(np.float32), valid


def write_flow(
    flow: np.ndarray, path: str | Path, fmt: str, valid: np.ndarray | None = None
) -> None:
    if fmt == "middlebury_flo":
        write_flo(flow, path)
    elif fmt == "kitti_png16":
        write_kitti_png(flow, path, valid)
    else:
        raise FlowFormatError(f"unknown flow format {fmt!r}")


def read_flow(path: str | Path, fmt: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Read a flow file; format is sniffed from the suffix when not given."""
    if fmt is None:
        fmt = "middlebury_flo" if str(path).endswith(".flo") else "kitti_png16"
    if fmt == "middlebury_flo":
        return read_flo(path)
    if fmt == "kitti_png16":
        return read_kitti_png(path)
    raise FlowFormatError(f"unknown flow format {fmt!r}")
