"""Input-gradient saliency volumes, binarization and frame export."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio.landmarks import clamp_box, region_box
from .dataio.pgm import write_pgm
from .graph import _backprop, graph_forward


@dataclass
class SaliencyVolume:
    values: np.ndarray  # same shape as the graph entry, channels = 1
    target_class: int
    source_id: str = ""


def input_gradient(graph, inputs, target_class: int) -> dict:
    """Absolute gradient of the target class's pre-softmax logit w.r.t.
    every input element, per input slot.

    Runs in infer mode (dropout is the identity) and leaves Param.grad
    untouched.
    """
    k = graph.num_classes()
    if not 0 <= target_class < k:
        raise ValueError(f"class index {target_class} out of range for {k} classes")
    probs, cache = graph_forward(graph, inputs, mode="infer")
    seed = np.zeros(k, dtype=probs.dtype)
    seed[target_class] = 1.0
    slot_grads = _backprop(graph, cache, seed, accumulate_params=False)
    return {
        slot: SaliencyVolume(np.abs(np.asarray(g, dtype=np.float64)), target_class)
        for slot, g in slot_grads.items()
    }


def binarize(values, percentile: float = 90.0):
    """Per temporal frame: 1 where the value strictly exceeds that frame's
    percentile, else 0."""
    if not 0.0 < percentile < 100.0:
        raise ValueError(f"percentile must be in (0, 100), got {percentile}")
    values = np.asarray(values)
    out = np.zeros(values.shape, dtype=np.uint8)
    for t in range(values.shape[-1]):
        frame = values[..., t]
        out[..., t] = frame > np.percentile(frame, percentile)
    return out


def export_frames(volume, out_dir, binary: bool | None = None) -> list:
    """Write one frame_####.pgm per temporal index.

    Continuous volumes are min-max scaled per frame to 0..255; binary
    volumes map {0, 1} to {0, 255}. With binary=None the volume dtype
    decides (uint8 means binary).
    """
    volume = np.asarray(volume)
    if binary is None:
        binary = volume.dtype == np.uint8
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    planes = volume[0] if volume.ndim == 4 else volume
    paths = []
    for t in range(planes.shape[-1]):
        frame = planes[:, :, t]
        if binary:
            img = (frame.astype(np.uint8) * 255).astype(np.uint8)
        else:
            lo, hi = float(frame.min()), float(frame.max())
            if hi > lo:
                img = np.rint((frame - lo) / (hi - lo) * 255.0).astype(np.uint8)
            else:
                img = np.zeros(frame.shape, dtype=np.uint8)
        path = out_dir / f"frame_{t:04d}.pgm"
        write_pgm(path, img)
        paths.append(path)
    return paths


def region_energy_report(binary_volume, points) -> dict:
    """Fractions of binarized saliency mass in the eye/mouth landmark boxes.

    points: (depth, 68, 2) landmarks in the volume's own coordinate frame.
    Boxes use margin 0; overlapping pixels are assigned by priority
    eyes > mouth > other. Fractions sum to 1 for any nonzero volume.
    """
    vol = np.asarray(binary_volume)
    planes = vol[0] if vol.ndim == 4 else vol
    h, w, depth = planes.shape
    points = np.asarray(points)
    if len(points) != depth:
        raise ValueError(f"{len(points)} landmark frames for a depth-{depth} volume")
    mass = {"eyes": 0.0, "mouth": 0.0, "other": 0.0}
    ys = np.arange(h)[:, None]
    xs = np.arange(w)[None, :]
    for t in range(depth):
        frame = planes[:, :, t].astype(np.float64)
        ex0, ey0, ex1, ey1 = clamp_box(region_box(points[t], "eyes"), w, h)
        mx0, my0, mx1, my1 = clamp_box(region_box(points[t], "mouth"), w, h)
        in_eyes = (xs >= ex0) & (xs <= ex1) & (ys >= ey0) & (ys <= ey1)
        in_mouth = (xs >= mx0) & (xs <= mx1) & (ys >= my0) & (ys <= my1) & ~in_eyes
        mass["eyes"] += float(frame[in_eyes].sum())
        mass["mouth"] += float(frame[in_mouth].sum())
        mass["other"] += float(frame[~in_eyes & ~in_mouth].sum())
    total = sum(mass.values())
    if total == 0.0:
        return {"eyes": 0.0, "mouth": 0.0, "other": 0.0, "total_mass": 0.0}
    return {k: v / total for k, v in mass.items()} | {"total_mass": total}


def write_sidecar(path, target_class, percentile, fractions=None) -> None:
    doc = {"target_class": target_class, "percentile": percentile}
    if fractions is not None:
        doc["region_energy"] = fractions
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
