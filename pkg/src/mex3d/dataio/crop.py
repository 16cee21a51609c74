"""Region cropping and bilinear resampling of clip frames.

Boxes are in pixel-center coordinates: box (x0, y0, x1, y1) covers the
pixel footprints from x0-0.5 to x1+0.5, so resampling the full frame
(0..W-1) to its own size is the identity map. Output samples sit at
half-pixel centers of the box; border samples clamp to edge pixels.
"""

from __future__ import annotations

import numpy as np

from .landmarks import clamp_box, expand_box, region_box

DEFAULT_MARGIN = 0.15


class CropError(ValueError):
    pass


def bilinear_resample(image, box, out_hw):
    """Sample an out_hw x out_hw float64 grid over `box` from a 2-D image."""
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape
    x0, y0, x1, y1 = box
    if x1 < x0 or y1 < y0:
        raise CropError(f"degenerate box {box}")
    sx = (x0 - 0.5) + (np.arange(out_hw) + 0.5) * ((x1 - x0 + 1.0) / out_hw)
    sy = (y0 - 0.5) + (np.arange(out_hw) + 0.5) * ((y1 - y0 + 1.0) / out_hw)
    fx = np.floor(sx)
    fy = np.floor(sy)
    tx = sx - fx
    ty = sy - fy
    x_lo = np.clip(fx.astype(np.int64), 0, w - 1)
    x_hi = np.clip(x_lo + 1, 0, w - 1)
    y_lo = np.clip(fy.astype(np.int64), 0, h - 1)
    y_hi = np.clip(y_lo + 1, 0, h - 1)
    top = image[y_lo[:, None], x_lo] * (1.0 - tx) + image[y_lo[:, None], x_hi] * tx
    bot = image[y_hi[:, None], x_lo] * (1.0 - tx) + image[y_hi[:, None], x_hi] * tx
    return top * (1.0 - ty[:, None]) + bot * ty[:, None]


def frame_region_box(frame_points, region, frame_hw, margin=DEFAULT_MARGIN):
    """Landmark-derived crop box: tight bbox, expanded, clamped to the frame."""
    h, w = frame_hw
    box = clamp_box(expand_box(region_box(frame_points, region), margin), w, h)
    if box[2] < box[0] or box[3] < box[1]:
        raise CropError(f"region {region!r} box degenerate after clamping: {box}")
    return box


def crop_region(frames, points, region, out_hw, margin=DEFAULT_MARGIN):
    """Crop a landmark region from every frame of a clip.

    frames: (n, H, W) uint8; points: (n, 68, 2). Returns a unit-scaled
    (1, out_hw, out_hw, n) float64 volume in the canonical layout.
    """
    frames = np.asarray(frames)
    points = np.asarray(points)
    if len(points) != len(frames):
        raise CropError(f"{len(points)} landmark frames for {len(frames)} clip frames")
    n, h, w = frames.shape
    out = np.empty((1, out_hw, out_hw, n), dtype=np.float64)
    for t in range(n):
        try:
            box = frame_region_box(points[t], region, (h, w), margin)
        except CropError as e:
            raise CropError(f"frame {t}: {e}") from None
        out[0, :, :, t] = bilinear_resample(frames[t], box, out_hw) / 255.0
    return out


def resize_frames(frames, out_hw):
    """Whole-frame resample for clips without landmarks (face region)."""
    frames = np.asarray(frames)
    n, h, w = frames.shape
    box = (0.0, 0.0, w - 1.0, h - 1.0)
    out = np.empty((1, out_hw, out_hw, n), dtype=np.float64)
    for t in range(n):
        out[0, :, :, t] = bilinear_resample(frames[t], box, out_hw) / 255.0
    return out
