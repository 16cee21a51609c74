"""Dataset manifest, clip loading, temporal sampling, splits and batching."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clippack import read_pack
from .crop import DEFAULT_MARGIN, crop_region, resize_frames
from .landmarks import read_landmarks
from .pgm import read_pgm


class DataError(ValueError):
    pass


@dataclass
class RawClip:
    frames: np.ndarray  # (frame_count, height, width) uint8
    source_id: str

    @property
    def frame_count(self) -> int:
        return len(self.frames)


def load_clip(path) -> RawClip:
    """Load a clip pack file or a directory of lexicographically ordered PGMs."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".pgm")
        if not files:
            raise DataError(f"{path}: no .pgm frames found")
        frames = []
        for f in files:
            img = read_pgm(f)
            if frames and img.shape != frames[0].shape:
                raise DataError(
                    f"{f}: frame size {img.shape} differs from first frame {frames[0].shape}"
                )
            frames.append(img)
        return RawClip(np.stack(frames), str(path))
    if not path.exists():
        raise DataError(f"{path}: no such clip")
    return RawClip(read_pack(path), str(path))


def temporal_sample(frame_count: int, depth: int) -> list[int]:
    """Uniform subsampling indices floor(i*N/d); identity when N == d."""
    if depth < 1:
        raise DataError(f"target depth must be >= 1, got {depth}")
    if frame_count < depth:
        raise DataError(f"clip has {frame_count} frames, fewer than the target depth {depth}")
    return [(i * frame_count) // depth for i in range(depth)]


def head_sample(frame_count: int, depth: int) -> list[int]:
    if frame_count < depth:
        raise DataError(f"clip has {frame_count} frames, fewer than the target depth {depth}")
    return list(range(depth))


_SAMPLERS = {"uniform": temporal_sample, "head": head_sample}


@dataclass
class Entry:
    clip: str
    landmarks: str | None
    label: int


@dataclass
class DatasetIndex:
    classes: list[str]
    entries: list[Entry]
    root: Path = field(default_factory=Path)
    split: list[str] | None = None  # per-entry "train" / "val"
    split_seed: int | None = None
    split_fraction: float | None = None
    temporal: str = "uniform"
    synth_seed: int | None = None

    def __post_init__(self):
        for e in self.entries:
            if not 0 <= e.label < len(self.classes):
                raise DataError(f"entry {e.clip!r} label {e.label} out of range for {len(self.classes)} classes")
        if self.split is not None and len(self.split) != len(self.entries):
            raise DataError("split assignment length differs from entry count")
        if self.temporal not in _SAMPLERS:
            raise DataError(f"unknown temporal mode {self.temporal!r}")

    def subset_indices(self, subset: str) -> list[int]:
        if subset not in ("train", "val"):
            raise DataError(f"subset must be 'train' or 'val', got {subset!r}")
        if self.split is None:
            raise DataError("dataset has no split; run split_dataset first")
        return [i for i, s in enumerate(self.split) if s == subset]

    def clip_path(self, i: int) -> Path:
        return self.root / self.entries[i].clip

    def landmark_path(self, i: int) -> Path | None:
        lm = self.entries[i].landmarks
        return None if lm is None else self.root / lm


def save_manifest(index: DatasetIndex, path) -> None:
    path = Path(path)
    doc = {
        "classes": index.classes,
        "entries": [
            {"clip": e.clip, "landmarks": e.landmarks, "label": e.label} for e in index.entries
        ],
        "split": index.split,
        "split_seed": index.split_seed,
        "split_fraction": index.split_fraction,
        "temporal": index.temporal,
        "synth_seed": index.synth_seed,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> DatasetIndex:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"{path}: manifest not found") from None
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: malformed manifest: {e}") from None
    try:
        entries = [Entry(d["clip"], d.get("landmarks"), int(d["label"])) for d in doc["entries"]]
        return DatasetIndex(
            classes=list(doc["classes"]),
            entries=entries,
            root=path.parent,
            split=doc.get("split"),
            split_seed=doc.get("split_seed"),
            split_fraction=doc.get("split_fraction"),
            temporal=doc.get("temporal", "uniform"),
            synth_seed=doc.get("synth_seed"),
        )
    except (KeyError, TypeError) as e:
        raise DataError(f"{path}: manifest missing field: {e}") from None


def split_dataset(index: DatasetIndex, fraction: float = 0.8, seed: int = 0) -> DatasetIndex:
    """Whole-dataset seeded shuffle; the first round(fraction*N) entries train.

    The assignment is stored on the index (and in the manifest once saved)
    so every later run reuses the same split.
    """
    if not 0.0 < fraction < 1.0:
        raise DataError(f"split fraction must be in (0, 1), got {fraction}")
    n = len(index.entries)
    if n < 2:
        raise DataError(f"cannot split a dataset of {n} entries")
    n_train = int(math.floor(fraction * n + 0.5))
    order = np.random.default_rng(seed).permutation(n)
    split = ["val"] * n
    for i in order[:n_train]:
        split[int(i)] = "train"
    index.split = split
    index.split_seed = seed
    index.split_fraction = fraction
    return index


def make_batches(index: DatasetIndex, subset: str, batch_size: int, epoch_seed: int) -> list[list[int]]:
    """Entry-index batches: train reshuffles per epoch seed, val order is fixed.

    The final short batch is kept.
    """
    if batch_size < 1:
        raise DataError(f"batch size must be >= 1, got {batch_size}")
    members = index.subset_indices(subset)
    if not members:
        raise DataError(f"subset {subset!r} is empty")
    if subset == "train":
        order = np.random.default_rng(epoch_seed).permutation(len(members))
        members = [members[int(i)] for i in order]
    return [members[i : i + batch_size] for i in range(0, len(members), batch_size)]


class ClipProvider:
    """Loads, crops and normalizes clips into model-input tensors.

    regions is the tuple of graph input slots ("face",) or ("eyes",
    "mouth"); each sample() returns one tensor per region plus the label.
    Decoded tensors are cached, so repeated epochs do no further IO.
    """

    def __init__(self, index: DatasetIndex, regions, hw: int, depth: int, dtype=np.float32,
                 margin: float = DEFAULT_MARGIN):
        self.index = index
        self.regions = tuple(regions)
        self.hw = int(hw)
        self.depth = int(depth)
        self.dtype = np.dtype(dtype)
        self.margin = margin
        self._cache: dict[int, tuple] = {}
        self._sampler = _SAMPLERS[index.temporal]

    def sample(self, i: int):
        if i not in self._cache:
            self._cache[i] = self._load(i)
        return self._cache[i]

    def _load(self, i: int):
        entry = self.index.entries[i]
        clip = load_clip(self.index.clip_path(i))
        picks = self._sampler(clip.frame_count, self.depth)
        frames = clip.frames[picks]
        lm_path = self.index.landmark_path(i)
        points = None
        if lm_path is not None:
            points = read_landmarks(lm_path)
            if len(points) != clip.frame_count:
                raise DataError(
                    f"{lm_path}: {len(points)} landmark frames for {clip.frame_count} clip frames"
                )
            points = points[picks]
        tensors = []
        for region in self.regions:
            if region == "face" and points is None:
                vol = resize_frames(frames, self.hw)
            elif points is None:
                raise DataError(f"{entry.clip}: landmarks required to crop the {region!r} region")
            else:
                vol = crop_region(frames, points, region, self.hw, self.margin)
            tensors.append(np.ascontiguousarray(vol, dtype=self.dtype))
        return tuple(tensors), entry.label
