"""Canonical 4-D tensor shapes and the shape algebra of the engine.

All activations are dense row-major arrays in (channels, height, width,
depth) order, where depth is the temporal axis. Vectors (flattened
features, logits) are tracked as plain element counts.
"""

from __future__ import annotations

from typing import NamedTuple

AXES = ("channels", "height", "width", "depth")

# Element counts must stay addressable by int64 with headroom for flat
# index arithmetic.
MAX_ELEMENTS = 2**62


class ShapeError(ValueError):
    """Raised when an operation's shape preconditions do not hold."""


class Shape4(NamedTuple):
    channels: int
    height: int
    width: int
    depth: int

    def count(self) -> int:
        return self.channels * self.height * self.width * self.depth

    def validate(self) -> "Shape4":
        for axis, extent in zip(AXES, self):
            if extent < 1:
                raise ShapeError(f"{axis} extent must be >= 1, got {extent}")
        if self.count() > MAX_ELEMENTS:
            raise ShapeError(f"element count {self.count()} overflows the index type")
        return self


def conv3d_output_shape(inp: Shape4, filters: int, kernel: tuple[int, int, int]) -> Shape4:
    """Valid-mode, stride-1 convolution: out = in - kernel + 1 per axis."""
    kh, kw, kd = kernel
    for axis, k, extent in (("height", kh, inp.height), ("width", kw, inp.width), ("depth", kd, inp.depth)):
        if k < 1:
            raise ShapeError(f"kernel {axis} extent must be >= 1, got {k}")
        if k > extent:
            raise ShapeError(f"kernel {axis} extent {k} exceeds input {axis} extent {extent}")
    if filters < 1:
        raise ShapeError(f"filter count must be >= 1, got {filters}")
    return Shape4(filters, inp.height - kh + 1, inp.width - kw + 1, inp.depth - kd + 1)


def pool3d_output_shape(inp: Shape4, window: tuple[int, int, int]) -> Shape4:
    """Stride = window pooling with truncating division; partial windows drop."""
    ph, pw, pd = window
    out = Shape4(inp.channels, inp.height // ph, inp.width // pw, inp.depth // pd)
    for axis, w, extent in (("height", ph, out.height), ("width", pw, out.width), ("depth", pd, out.depth)):
        if w < 1:
            raise ShapeError(f"pool {axis} window must be >= 1, got {w}")
        if extent == 0:
            raise ShapeError(f"pool window {w} exceeds input {axis} extent; output {axis} would be 0")
    return out
