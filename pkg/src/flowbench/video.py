"""Stream-level corruptions through an external H.264 encode/decode round trip.

Three knobs, one per corruption: constant rate factor (``-crf``), average bit
rate (``-b:v``), and bit-stream error injection (the ``noise`` bitstream
filter). Everything else is frozen for reproducibility: libx264, yuv420p,
default preset and GOP. The encoder binary is ``ffmpeg`` (or the path in
``$FLOWBENCH_FFMPEG``); every invocation is recorded verbatim so a run
manifest can reproduce it.

Encoder output varies across encoder builds, so golden comparisons must pin
the encoder version string reported here.
"""

from __future__ import annotations

import os
import re
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import CorruptionKind as K
from .core import ImagePair, severity_params
from . import imgops

ENCODER_ENV = "FLOWBENCH_FFMPEG"
DEFAULT_ENCODER = "ffmpeg"

VIDEO_KINDS = (K.H264_CRF, K.H264_ABR, K.BIT_ERROR)


class EncoderError(RuntimeError):
    pass


class EncoderMissingError(EncoderError):
    def __init__(self, name: str):
        super().__init__(
            f"external video encoder {name!r} not found; install ffmpeg or point "
            f"${ENCODER_ENV} (or --encoder) at an ffmpeg binary"
        )


class EncoderFailedError(EncoderError):
    def __init__(self, argv: list[str], returncode: int, stderr: str):
        self.argv = argv
        self.returncode = returncode
        self.stderr = stderr
        tail = "\n".join(stderr.strip().splitlines()[-8:])
        super().__init__(
            f"encoder exited with {returncode}: {' '.join(argv)}\n{tail}"
        )


def find_encoder(override: str | None = None) -> str | None:
    candidate = override or os.environ.get(ENCODER_ENV) or DEFAULT_ENCODER
    return shutil.which(candidate)


def require_encoder(override: str | None = None) -> str:
    found = find_encoder(override)
    if found is None:
        raise EncoderMissingError(
            override or os.environ.get(ENCODER_ENV) or DEFAULT_ENCODER
        )
    return found


def encoder_version(encoder: str) -> str:
    out = subprocess.run(
        [encoder, "-version"], capture_output=True, text=True, check=False
    )
    first = (out.stdout or out.stderr).splitlines()
    return first[0].strip() if first else "unknown"


# ---------------------------------------------------------------------------
# Invocation construction (pure; reconstructible from kind/severity/paths)
# ---------------------------------------------------------------------------


def build_encode_argv(
    kind: K, severity: int, in_pattern: str, out_path: str, fps: int
) -> list[str]:
    base = [
        "-y",
        "-framerate",
        str(fps),
        "-i",
        in_pattern,
        "-c:v",
        "libx264",
        "-pix_fmt",
        "yuv420p",
        # yuv420p needs even dimensions; replicate-pad odd inputs
        "-vf",
        "pad=ceil(iw/2)*2:ceil(ih/2)*2",
    ]
    if kind is K.H264_CRF:
        param = severity_params(K.H264_CRF, severity)
        base += ["-crf", str(param)]
    elif kind is K.H264_ABR:
        rate = severity_params(K.H264_ABR, severity)
        base += ["-b:v", str(rate)]
    elif kind is K.BIT_ERROR:
        # Bit error corrupts the stream after a default-quality encode
        base += ["-crf", "23"]
    else:
        raise ValueError(f"{kind} is not a video corruption")
    return base + [out_path]


def build_noise_argv(in_path: str, out_path: str, amount: int) -> list[str]:
    return [
        "-y",
        "-i",
        in_path,
        "-c",
        "copy",
        "-bsf:v",
        f"noise=amount={amount}",
        out_path,
    ]


def build_decode_argv(in_path: str, out_pattern: str, tolerant: bool) -> list[str]:
    argv = ["-y"]
    if tolerant:
        argv += ["-err_detect", "ignore_err", "-fflags", "+genpts"]
    return argv + ["-i", in_path, "-start_number", "0", out_pattern]


@dataclass(frozen=True)
class EncoderInvocation:
    executable: str
    argv: tuple[str, ...]

    def command(self) -> list[str]:
        return [self.executable, *self.argv]


@dataclass
class VideoCorruptionResult:
    frames: list[np.ndarray]
    substituted_indices: list[int]
    encoder_version: str
    invocations: list[EncoderInvocation] = field(default_factory=list)


def _run(encoder: str, argv: list[str]) -> EncoderInvocation:
    cmd = [encoder, *argv]
    proc = subprocess.run(cmd, capture_output=True, text=True, check=False)
    if proc.returncode != 0:
        raise EncoderFailedError(cmd, proc.returncode, proc.stderr)
    return EncoderInvocation(encoder, tuple(argv))


def apply_video_corruption(
    frames,
    severity: int,
    kind: K,
    workdir: str | Path,
    fps: int = 960,
    encoder: str | None = None,
    keep_indices=None,
) -> VideoCorruptionResult:
    """Encode the frame sequence as one H.264 stream and decode it back.

    ``frames`` may be any iterable; frames are written to disk as they are
    consumed, so long streams never sit in memory. Frame count and
    dimensions are preserved; with bit errors the decode is tolerant and
    undecodable frames are replaced by the nearest decoded one (their
    indices appear in ``substituted_indices``). When ``keep_indices`` is
    given, only those positions of the result are loaded back (the rest are
    None), which keeps full-length benchmark streams tractable. All
    intermediate artifacts live under ``workdir`` and are safe to delete
    afterwards.
    """
    exe = require_encoder(encoder)
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)

    n_frames = 0
    h = w = None
    for i, frame in enumerate(frames):
        if h is None:
            h, w = frame.shape[:2]
        elif frame.shape[:2] != (h, w):
            raise ValueError("video corruption requires uniform frame dimensions")
        imgops.save_png(frame, workdir / f"in_{i:06d}.png")
        n_frames += 1
    if n_frames < 2:
        raise ValueError("video corruption needs at least 2 frames")

    invocations = []
    encoded = workdir / "encoded.mp4"
    invocations.append(
        _run(exe, build_encode_argv(kind, severity, str(workdir / "in_%06d.png"), str(encoded), fps))
    )
    stream = encoded
    if kind is K.BIT_ERROR:
        amount = severity_params(K.BIT_ERROR, severity)
        noisy = workdir / "noisy.mp4"
        invocations.append(_run(exe, build_noise_argv(str(encoded), str(noisy), amount)))
        stream = noisy

    dec_pattern = workdir / "dec_%06d.png"
    try:
        invocations.append(
            _run(exe, build_decode_argv(str(stream), str(dec_pattern), kind is K.BIT_ERROR))
        )
    except EncoderFailedError:
        if kind is not K.BIT_ERROR:
            raise
        # A heavily damaged stream can make the decoder bail mid-way; keep
        # whatever frames it managed to emit.

    decoded_paths = {}
    for path in sorted(workdir.glob("dec_*.png")):
        idx = int(re.search(r"dec_(\d+)\.png$", path.name).group(1))
        if idx < n_frames:
            decoded_paths[idx] = path
    if not decoded_paths:
        raise EncoderError(
            f"decoder produced no frames for {kind.value} severity {severity}"
        )

    available = sorted(decoded_paths)
    substituted = []
    wanted = set(range(n_frames)) if keep_indices is None else set(keep_indices)
    out_frames: list[np.ndarray | None] = [None] * n_frames
    for i in range(n_frames):
        source = i
        if i not in decoded_paths:
            source = min(available, key=lambda j: abs(j - i))
            substituted.append(i)
        if i in wanted:
            out_frames[i] = imgops.load_image(decoded_paths[source])[:h, :w]

    return VideoCorruptionResult(
        frames=out_frames,
        substituted_indices=substituted,
        encoder_version=encoder_version(exe),
        invocations=invocations,
    )


def extract_pairs_from_stream(
    decoded, pair_indices, pair_ids=None, fps: int = 960
) -> list[ImagePair]:
    """Cut frame pairs at the same indices as the clean sampling."""
    decoded = list(decoded)
    pairs = []
    for n, (ia, ib) in enumerate(pair_indices):
        if not (0 <= ia < len(decoded)) or not (0 <= ib < len(decoded)):
            raise IndexError(
                f"pair indices ({ia}, {ib}) out of bounds for {len(decoded)} decoded frames"
            )
        if decoded[ia] is None or decoded[ib] is None:
            raise ValueError(
                f"pair indices ({ia}, {ib}) were not loaded from the decoded stream"
            )
        pid = pair_ids[n] if pair_ids is not None else f"pair_{n:06d}"
        pairs.append(ImagePair(decoded[ia], decoded[ib], pid, (ib - ia) / fps))
    return pairs
