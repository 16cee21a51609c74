"""Binary (P5) PGM image read/write for 8-bit grayscale frames."""

from __future__ import annotations

import numpy as np


class PgmError(ValueError):
    pass


def write_pgm(path, image) -> None:
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint8:
        raise PgmError(f"PGM frames must be 2-D uint8, got shape {image.shape} dtype {image.dtype}")
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image).tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise PgmError(f"{path}: not a binary PGM (P5) file")
    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed between them.
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise PgmError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError:
        raise PgmError(f"{path}: malformed PGM header tokens {tokens}") from None
    if maxval != 255:
        raise PgmError(f"{path}: unsupported maxval {maxval}, expected 255")
    pixels = data[pos : pos + w * h]
    if len(pixels) != w * h:
        raise PgmError(f"{path}: expected {w * h} pixel bytes, found {len(pixels)}")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w).copy()
