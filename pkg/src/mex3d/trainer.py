"""SGD training loop, evaluation metrics and last-k-epoch statistics."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dataio import ClipProvider, DataError, make_batches
from .graph import graph_backward, graph_forward

PRECISIONS = {"f32": np.float32, "f64": np.float64}


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 8
    learning_rate: float = 0.01
    seed: int = 0
    precision: str = "f32"
    eval_every: int = 1
    checkpoint: str | None = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {sorted(PRECISIONS)}, got {self.precision!r}")

    @property
    def dtype(self):
        return PRECISIONS[self.precision]

    def to_dict(self) -> dict:
        # The checkpoint path is runtime wiring, not provenance; keeping it
        # out of serialized configs keeps equal runs byte-identical.
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "precision": self.precision,
            "eval_every": self.eval_every,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


class ConfusionMatrix:
    """k x k counts; rows are true classes, columns predicted classes."""

    def __init__(self, num_classes: int):
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)

    @classmethod
    def from_counts(cls, counts) -> "ConfusionMatrix":
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError(f"confusion matrix must be square, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("confusion matrix entries must be nonnegative")
        m = cls(counts.shape[0])
        m.counts = counts
        return m

    def add(self, true_class: int, predicted: int) -> None:
        self.counts[true_class, predicted] += 1

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    @property
    def accuracy(self) -> float:
        return self.correct / self.total

    def to_lists(self):
        return self.counts.tolist()


@dataclass
class EpochRow:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float | None = None
    val_confusion: list | None = None
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        # wall time is reported, never serialized: equal seeds must give
        # byte-identical checkpoints.
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "train_acc": self.train_acc,
            "val_acc": self.val_acc,
            "val_confusion": self.val_confusion,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpochRow":
        return cls(**d)


def sgd_step(params, learning_rate: float) -> None:
    """value <- value - lr * grad for every element; grads are then zeroed.

    Callers populate grads with the mean over the mini-batch first.
    """
    for p in params:
        p.value -= learning_rate * p.grad
        p.zero_grad()


def last_k_stats(log, k: int = 10):
    """(mean, sample standard deviation) of val accuracy over the last k epochs."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    values = [row.val_acc if isinstance(row, EpochRow) else float(row) for row in log]
    if len(values) < k:
        raise ValueError(f"log has {len(values)} epochs, fewer than k={k}")
    tail = values[-k:]
    if any(v is None for v in tail):
        raise ValueError("last k epochs are missing validation accuracy")
    mean = sum(tail) / k
    if k == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in tail) / (k - 1)
    return mean, math.sqrt(var)


def provider_for_graph(graph, index, dtype) -> ClipProvider:
    """Regions/geometry for the provider come straight off the input slots."""
    slots = graph.input_slots
    shape = next(iter(slots.values()))
    return ClipProvider(index, regions=tuple(slots), hw=shape.height, depth=shape.depth, dtype=dtype)


def evaluate(graph, provider: ClipProvider, indices):
    """Infer-mode accuracy + confusion matrix; argmax ties go to the lowest class."""
    if not indices:
        raise DataError("cannot evaluate an empty subset")
    matrix = ConfusionMatrix(graph.num_classes())
    for i in indices:
        tensors, label = provider.sample(i)
        inputs = dict(zip(graph.input_slots, tensors))
        probs, _ = graph_forward(graph, inputs, mode="infer")
        matrix.add(label, int(np.argmax(probs)))
    return matrix.accuracy, matrix


def train(graph, spec, index, cfg: TrainConfig):
    """Mini-batch SGD over the train split with per-epoch validation.

    The graph arrives built and initialized; gradients are averaged over
    each batch in a fixed order, so equal seeds give bit-identical runs.
    Returns (Checkpoint, epoch log); the checkpoint is also written to
    cfg.checkpoint when that is set.
    """
    from .checkpoint import make_checkpoint, save_checkpoint

    provider = provider_for_graph(graph, index, cfg.dtype)
    train_idx = index.subset_indices("train")
    val_idx = index.subset_indices("val")
    if not train_idx:
        raise DataError("train subset is empty")

    dropout_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 101]))
    params = graph.params()
    graph.zero_grads()
    log: list[EpochRow] = []

    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        epoch_seed = int(np.random.SeedSequence([cfg.seed, 202, epoch]).generate_state(1)[0])
        loss_sum = 0.0
        correct = 0
        seen = 0
        for batch in make_batches(index, "train", cfg.batch_size, epoch_seed):
            for i in batch:
                tensors, label = provider.sample(i)
                inputs = dict(zip(graph.input_slots, tensors))
                probs, cache = graph_forward(graph, inputs, mode="train", rng=dropout_rng)
                loss_sum += -float(np.log(max(float(probs[label]), 1e-30)))
                correct += int(np.argmax(probs)) == label
                seen += 1
                graph_backward(graph, cache, label)
            inv = 1.0 / len(batch)
            for p in params:
                p.grad *= inv
            sgd_step(params, cfg.learning_rate)

        row = EpochRow(epoch=epoch + 1, train_loss=loss_sum / seen, train_acc=correct / seen)
        if val_idx and (epoch + 1) % cfg.eval_every == 0:
            val_acc, matrix = evaluate(graph, provider, val_idx)
            row.val_acc = val_acc
            row.val_confusion = matrix.to_lists()
        row.wall_time_s = time.perf_counter() - started
        log.append(row)

    ckpt = make_checkpoint(graph, spec, cfg, log, seeds={"train": cfg.seed, "split": index.split_seed})
    if cfg.checkpoint:
        save_checkpoint(ckpt, cfg.checkpoint)
    return ckpt, log
