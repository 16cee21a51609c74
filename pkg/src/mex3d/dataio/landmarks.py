"""68-point facial landmark files and region boxes.

File format: plain text, one line per frame, 136 whitespace-separated
numbers x0 y0 ... x67 y67 in pixel units. Point subsets follow the
standard 68-point annotation: 36-47 eyes, 48-67 mouth, 0-67 whole face.
"""

from __future__ import annotations

import numpy as np

REGION_POINTS = {
    "eyes": slice(36, 48),
    "mouth": slice(48, 68),
    "face": slice(0, 68),
}


class LandmarkError(ValueError):
    pass


def write_landmarks(path, points) -> None:
    """points: (frames, 68, 2) array of (x, y) pixel coordinates."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 3 or points.shape[1:] != (68, 2):
        raise LandmarkError(f"landmarks must be (frames, 68, 2), got {points.shape}")
    with open(path, "w") as fh:
        for frame in points:
            fh.write(" ".join(repr(float(v)) for v in frame.reshape(-1)) + "\n")


def read_landmarks(path):
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            values = line.split()
            if len(values) != 136:
                raise LandmarkError(f"{path}:{lineno}: expected 136 numbers, found {len(values)}")
            try:
                rows.append([float(v) for v in values])
            except ValueError:
                raise LandmarkError(f"{path}:{lineno}: non-numeric landmark value") from None
    if not rows:
        raise LandmarkError(f"{path}: no landmark frames")
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), 68, 2)


def region_box(frame_points, region):
    """Tight axis-aligned (x0, y0, x1, y1) box of the region's point subset."""
    if region not in REGION_POINTS:
        raise LandmarkError(f"unknown region {region!r}; expected one of {sorted(REGION_POINTS)}")
    pts = frame_points[REGION_POINTS[region]]
    return float(pts[:, 0].min()), float(pts[:, 1].min()), float(pts[:, 0].max()), float(pts[:, 1].max())


def expand_box(box, margin_frac):
    """Symmetric expansion: each side grows by margin_frac of that axis extent."""
    x0, y0, x1, y1 = box
    mx = margin_frac * (x1 - x0)
    my = margin_frac * (y1 - y0)
    return x0 - mx, y0 - my, x1 + mx, y1 + my


def clamp_box(box, width, height):
    """Clamp to the frame's pixel-center range [0, width-1] x [0, height-1]."""
    x0, y0, x1, y1 = box
    return (
        min(max(x0, 0.0), width - 1.0),
        min(max(y0, 0.0), height - 1.0),
        min(max(x1, 0.0), width - 1.0),
        min(max(y1, 0.0), height - 1.0),
    )
