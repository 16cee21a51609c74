"""The clip pack container: a fixed-size grayscale frame sequence.

Layout (all integers little-endian):
  magic "MCLP" | u16 version | u16 height | u16 width | u16 depth |
  height*width*depth bytes of 8-bit pixels, frame-major.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"MCLP"
VERSION = 1
_HEADER = struct.Struct("<4sHHHH")


class ClipPackError(ValueError):
    pass


def write_pack(path, frames) -> None:
    """frames: (depth, height, width) uint8."""
    frames = np.asarray(frames)
    if frames.ndim != 3 or frames.dtype != np.uint8:
        raise ClipPackError(f"frames must be (depth, h, w) uint8, got {frames.shape} {frames.dtype}")
    d, h, w = frames.shape
    if max(d, h, w) > 0xFFFF:
        raise ClipPackError(f"clip dimensions {frames.shape} exceed the u16 header range")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, h, w, d))
        fh.write(np.ascontiguousarray(frames).tobytes())


def read_pack(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise ClipPackError(f"{path}: file shorter than the clip pack header")
    magic, version, h, w, d = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ClipPackError(f"{path}: bad magic {magic!r}, not a clip pack")
    if version != VERSION:
        raise ClipPackError(f"{path}: unsupported clip pack version {version}")
    expected = h * w * d
    pixels = data[_HEADER.size :]
    if len(pixels) != expected:
        raise ClipPackError(f"{path}: expected {expected} pixel bytes, found {len(pixels)}")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(d, h, w).copy()
