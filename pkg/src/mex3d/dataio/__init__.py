"""Clip ingestion, landmark cropping, dataset manifests and synthesis."""

from .clippack import ClipPackError, read_pack, write_pack
from .crop import CropError, bilinear_resample, crop_region, frame_region_box, resize_frames
from .dataset import (
    ClipProvider,
    DataError,
    DatasetIndex,
    Entry,
    RawClip,
    head_sample,
    load_clip,
    load_manifest,
    make_batches,
    save_manifest,
    split_dataset,
    temporal_sample,
)
from .landmarks import LandmarkError, read_landmarks, region_box, write_landmarks
from .pgm import PgmError, read_pgm, write_pgm
from .synth import synth_dataset

__all__ = [
    "ClipPackError",
    "ClipProvider",
    "CropError",
    "DataError",
    "DatasetIndex",
    "Entry",
    "LandmarkError",
    "PgmError",
    "RawClip",
    "bilinear_resample",
    "crop_region",
    "frame_region_box",
    "head_sample",
    "load_clip",
    "load_manifest",
    "make_batches",
    "read_landmarks",
    "read_pack",
    "read_pgm",
    "region_box",
    "resize_frames",
    "save_manifest",
    "split_dataset",
    "synth_dataset",
    "temporal_sample",
    "write_landmarks",
    "write_pack",
    "write_pgm",
]
