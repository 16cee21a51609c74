"""Binary checkpoint container: graph provenance + parameter blocks.

Layout (integers little-endian):
  magic "MEX3" | u16 version | u32 meta_len | meta JSON (UTF-8) |
  u32 n_params | per param: u16 name_len | name | u64 element count |
  elements as little-endian floats (dtype recorded in the meta block).

Saving, loading and saving again is byte-identical; wall times and
runtime paths are deliberately not serialized.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .models import ArchSpec, build_graph
from .trainer import EpochRow, TrainConfig

MAGIC = b"MEX3"
VERSION = 1
_DTYPES = {"f4": np.dtype("<f4"), "f8": np.dtype("<f8")}


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    arch: ArchSpec
    train_config: TrainConfig
    epoch_log: list
    seeds: dict
    params: list  # ordered (name, ndarray) pairs
    dtype_code: str = "f4"


def make_checkpoint(graph, spec: ArchSpec, cfg: TrainConfig, log, seeds) -> Checkpoint:
    params = [(p.name, p.value.copy()) for p in graph.params()]
    code = "f4" if params[0][1].dtype == np.float32 else "f8"
    return Checkpoint(
        arch=spec,
        train_config=cfg,
        epoch_log=list(log),
        seeds=dict(seeds),
        params=params,
        dtype_code=code,
    )


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    meta = {
        "arch": ckpt.arch.to_dict(),
        "train_config": ckpt.train_config.to_dict(),
        "epoch_log": [row.to_dict() for row in ckpt.epoch_log],
        "seeds": ckpt.seeds,
        "dtype": ckpt.dtype_code,
    }
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    dtype = _DTYPES[ckpt.dtype_code]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(struct.pack("<I", len(ckpt.params)))
        for name, value in ckpt.params:
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<Q", value.size))
            fh.write(np.ascontiguousarray(value, dtype=dtype).tobytes())


class _Reader:
    def __init__(self, data, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n, what):
        if self.pos + n > len(self.data):
            raise CheckpointError(f"{self.path}: truncated checkpoint while reading {what}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt, what):
        (value,) = struct.unpack(fmt, self.take(struct.calcsize(fmt), what))
        return value


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data, path)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}, not a checkpoint")
    version = r.unpack("<H", "version")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    meta_len = r.unpack("<I", "metadata length")
    try:
        meta = json.loads(r.take(meta_len, "metadata").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: malformed checkpoint metadata: {e}") from None
    if meta.get("dtype") not in _DTYPES:
        raise CheckpointError(f"{path}: unknown parameter dtype {meta.get('dtype')!r}")
    dtype = _DTYPES[meta["dtype"]]

    n_params = r.unpack("<I", "parameter count")
    params = []
    for _ in range(n_params):
        name_len = r.unpack("<H", "parameter name length")
        name = r.take(name_len, "parameter name").decode("utf-8")
        count = r.unpack("<Q", f"element count of {name!r}")
        raw = r.take(count * dtype.itemsize, f"parameter block {name!r}")
        params.append((name, np.frombuffer(raw, dtype=dtype).copy()))
    if r.pos != len(data):
        raise CheckpointError(f"{path}: {len(data) - r.pos} trailing bytes after parameter blocks")

    return Checkpoint(
        arch=ArchSpec.from_dict(meta["arch"]),
        train_config=TrainConfig.from_dict(meta["train_config"]),
        epoch_log=[EpochRow.from_dict(d) for d in meta["epoch_log"]],
        seeds=dict(meta["seeds"]),
        params=params,
        dtype_code=meta["dtype"],
    )


def rebuild_graph(ckpt: Checkpoint):
    """Build the architecture and restore parameter values by name."""
    graph = build_graph(ckpt.arch, dtype=_DTYPES[ckpt.dtype_code])
    live = {p.name: p for p in graph.params()}
    if set(live) != {name for name, _ in ckpt.params}:
        raise CheckpointError(
            f"checkpoint parameters {sorted(n for n, _ in ckpt.params)} do not match "
            f"the architecture's {sorted(live)}"
        )
    for name, flat in ckpt.params:
        p = live[name]
        if flat.size != p.value.size:
            raise CheckpointError(
                f"parameter {name!r} has {flat.size} elements, architecture expects {p.value.size}"
            )
        p.value[...] = flat.reshape(p.value.shape)
    return graph
