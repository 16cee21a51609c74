"""Synthetic clip generator for desk-scale testing and acceptance runs.

Each class k gets clips of a bright Gaussian blob translating in
direction 2*pi*k/num_classes at fixed speed, over a noisy background.
Clips come with synthetic 68-point landmark files whose eye/mouth boxes
sit at canonical face positions, plus a manifest tying it together.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .clippack import write_pack
from .dataset import DatasetIndex, DataError, Entry, save_manifest
from .landmarks import write_landmarks

BLOB_PEAK = 190.0
NOISE_LEVEL = 18


def _blob_frames(hw: int, depth: int, angle: float, rng) -> np.ndarray:
    sigma = hw / 7.0
    travel = 0.22 * hw  # half the total displacement; keeps the blob in frame
    cx0 = (hw - 1) / 2.0 - travel * math.cos(angle)
    cy0 = (hw - 1) / 2.0 - travel * math.sin(angle)
    step = 2.0 * travel / max(depth - 1, 1)
    yy, xx = np.mgrid[0:hw, 0:hw]
    frames = np.empty((depth, hw, hw), dtype=np.uint8)
    for t in range(depth):
        cx = cx0 + step * t * math.cos(angle)
        cy = cy0 + step * t * math.sin(angle)
        blob = BLOB_PEAK * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * sigma**2))
        noise = rng.integers(0, NOISE_LEVEL + 1, size=(hw, hw))
        frames[t] = np.clip(blob + noise, 0, 255).astype(np.uint8)
    return frames


def _canonical_landmarks(hw: int, depth: int) -> np.ndarray:
    """Static 68-point layout: face oval, brows/nose filler, eyes, mouth."""
    s = float(hw)
    pts = np.zeros((68, 2))
    # 0-16 jaw along the face oval, 17-35 brows + nose inside the upper face
    for i in range(17):
        a = math.pi * (0.1 + 0.8 * i / 16.0)
        pts[i] = (0.5 + 0.42 * math.cos(a)) * s, (0.45 + 0.45 * math.sin(a)) * s
    for i in range(17, 36):
        frac = (i - 17) / 18.0
        pts[i] = (0.3 + 0.4 * frac) * s, (0.22 + 0.06 * math.sin(6.0 * frac)) * s
    # 36-47 eyes: two small hexagon-ish clusters
    for e, x_center in enumerate((0.35, 0.65)):
        for i in range(6):
            a = 2.0 * math.pi * i / 6.0
            pts[36 + 6 * e + i] = (x_center + 0.07 * math.cos(a)) * s, (0.36 + 0.035 * math.sin(a)) * s
    # 48-67 mouth ellipse
    for i in range(20):
        a = 2.0 * math.pi * i / 20.0
        pts[48 + i] = (0.5 + 0.14 * math.cos(a)) * s, (0.68 + 0.06 * math.sin(a)) * s
    pts = np.clip(pts, 0.0, s - 1.0)
    return np.repeat(pts[None, :, :], depth, axis=0)


def synth_dataset(num_classes: int, clips_per_class: int, hw: int, depth: int, seed: int,
                  out_dir) -> DatasetIndex:
    if num_classes < 2:
        raise DataError(f"need at least 2 classes, got {num_classes}")
    if clips_per_class < 1:
        raise DataError(f"need at least 1 clip per class, got {clips_per_class}")
    out_dir = Path(out_dir)
    (out_dir / "clips").mkdir(parents=True, exist_ok=True)
    (out_dir / "landmarks").mkdir(parents=True, exist_ok=True)

    landmarks = _canonical_landmarks(hw, depth)
    entries = []
    for k in range(num_classes):
        angle = 2.0 * math.pi * k / num_classes
        for j in range(clips_per_class):
            rng = np.random.default_rng(np.random.SeedSequence([seed, k, j]))
            frames = _blob_frames(hw, depth, angle, rng)
            clip_rel = f"clips/class{k}_clip{j:03d}.mclp"
            lm_rel = f"landmarks/class{k}_clip{j:03d}.lmk"
            write_pack(out_dir / clip_rel, frames)
            write_landmarks(out_dir / lm_rel, landmarks)
            entries.append(Entry(clip_rel, lm_rel, k))

    index = DatasetIndex(
        classes=[f"class{k}" for k in range(num_classes)],
        entries=entries,
        root=out_dir,
        synth_seed=seed,
    )
    save_manifest(index, out_dir / "manifest.json")
    return index
