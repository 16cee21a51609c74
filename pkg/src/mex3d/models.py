"""The three video-classification architectures as buildable graph plans.

Each architecture is described once as a flat layer plan; the builder
instantiates it with parameters while shape_report runs the same plan
symbolically, so static reports and the executable graph cannot drift
apart.

Kinds:
  stcnn             one full-face stream: conv3d -> pool -> dense head
  fuse_intermediate two streams (eyes, mouth) concatenated after flatten
  fuse_late         two streams concatenated after their dense stacks
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .graph import (
    Concat,
    Conv3D,
    Dense,
    Dropout,
    Flatten,
    MaxPool3D,
    NetworkGraph,
    Param,
    ReLU,
    SoftmaxOutput,
)
from .shapes import Shape4, ShapeError

ARCH_KINDS = ("stcnn", "fuse_intermediate", "fuse_late")

_KIND_DENSE_DEFAULTS = {
    "stcnn": (128,),
    "fuse_intermediate": (1024, 128),
    "fuse_late": (1024, 128),
}
_KIND_INPUT_HW = {"stcnn": 64, "fuse_intermediate": 32, "fuse_late": 32}


@dataclass(frozen=True)
class ArchSpec:
    kind: str
    input_hw: int
    depth: int
    kernel: tuple = (3, 3, 15)
    filters: int = 32
    pool: tuple = (3, 3, 3)
    num_classes: int = 3
    dropout_rate: float = 0.5
    final_dropout: bool = False
    dense_units: tuple | None = None

    def __post_init__(self):
        if self.kind not in ARCH_KINDS:
            raise ValueError(f"unknown architecture kind {self.kind!r}; known: {ARCH_KINDS}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        object.__setattr__(self, "kernel", tuple(int(v) for v in self.kernel))
        object.__setattr__(self, "pool", tuple(int(v) for v in self.pool))
        if self.dense_units is not None:
            object.__setattr__(self, "dense_units", tuple(int(v) for v in self.dense_units))

    @property
    def dense(self) -> tuple:
        return self.dense_units if self.dense_units is not None else _KIND_DENSE_DEFAULTS[self.kind]

    def with_kernel(self, kernel) -> "ArchSpec":
        return replace(self, kernel=tuple(kernel))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "input_hw": self.input_hw,
            "depth": self.depth,
            "kernel": list(self.kernel),
            "filters": self.filters,
            "pool": list(self.pool),
            "num_classes": self.num_classes,
            "dropout_rate": self.dropout_rate,
            "final_dropout": self.final_dropout,
            "dense_units": list(self.dense_units) if self.dense_units is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArchSpec":
        d = dict(d)
        for key in ("kernel", "pool"):
            if key in d and d[key] is not None:
                d[key] = tuple(d[key])
        if d.get("dense_units") is not None:
            d["dense_units"] = tuple(d["dense_units"])
        return cls(**d)


def stcnn_spec(depth=96, **kw) -> ArchSpec:
    kw.setdefault("input_hw", _KIND_INPUT_HW["stcnn"])
    return ArchSpec(kind="stcnn", depth=depth, **kw)


def fuse_intermediate_spec(depth=96, **kw) -> ArchSpec:
    kw.setdefault("input_hw", _KIND_INPUT_HW["fuse_intermediate"])
    return ArchSpec(kind="fuse_intermediate", depth=depth, **kw)


def fuse_late_spec(depth=96, **kw) -> ArchSpec:
    kw.setdefault("input_hw", _KIND_INPUT_HW["fuse_late"])
    return ArchSpec(kind="fuse_late", depth=depth, **kw)


# A plan step: (kind, name, inputs, cfg). cfg keys per kind:
#   conv: filters, kernel; pool: window; dropout: rate; dense: units.
def _layer_plan(spec: ArchSpec):
    hw, d, rate = spec.input_hw, spec.depth, spec.dropout_rate
    if spec.kind == "stcnn":
        slots = {"face": Shape4(1, hw, hw, d)}
        steps = [
            ("conv", "conv1", ["face"], {"filters": spec.filters, "kernel": spec.kernel}),
            ("relu", "relu1", ["conv1"], {}),
            ("pool", "pool1", ["relu1"], {"window": spec.pool}),
            ("dropout", "drop1", ["pool1"], {"rate": rate}),
            ("flatten", "flat1", ["drop1"], {}),
            ("dense", "dense1", ["flat1"], {"units": spec.dense[0]}),
            ("relu", "relu2", ["dense1"], {}),
            ("dropout", "drop2", ["relu2"], {"rate": rate}),
            ("dense", "dense2", ["drop2"], {"units": spec.num_classes}),
        ]
        last = "dense2"
        if spec.final_dropout:
            steps.append(("dropout", "drop3", [last], {"rate": rate}))
            last = "drop3"
        steps.append(("softmax", "softmax", [last], {}))
        return slots, steps

    slots = {"eyes": Shape4(1, hw, hw, d), "mouth": Shape4(1, hw, hw, d)}
    steps = [
        ("conv", "conv1", ["eyes"], {"filters": spec.filters, "kernel": spec.kernel}),
        ("conv", "conv2", ["mouth"], {"filters": spec.filters, "kernel": spec.kernel}),
        ("relu", "relu1", ["conv1"], {}),
        ("relu", "relu2", ["conv2"], {}),
        ("pool", "pool1", ["relu1"], {"window": spec.pool}),
        ("pool", "pool2", ["relu2"], {"window": spec.pool}),
        ("dropout", "drop1", ["pool1"], {"rate": rate}),
        ("dropout", "drop2", ["pool2"], {"rate": rate}),
        ("flatten", "flat1", ["drop1"], {}),
        ("flatten", "flat2", ["drop2"], {}),
    ]
    u1, u2 = spec.dense[0], spec.dense[1]
    if spec.kind == "fuse_intermediate":
        steps += [
            ("concat", "concat", ["flat1", "flat2"], {}),
            ("dense", "dense1", ["concat"], {"units": u1}),
            ("relu", "relu3", ["dense1"], {}),
            ("dropout", "drop3", ["relu3"], {"rate": rate}),
            ("dense", "dense2", ["drop3"], {"units": u2}),
            ("relu", "relu4", ["dense2"], {}),
            ("dropout", "drop4", ["relu4"], {"rate": rate}),
            ("dense", "dense3", ["drop4"], {"units": spec.num_classes}),
            ("softmax", "softmax", ["dense3"], {}),
        ]
    else:  # fuse_late
        steps += [
            ("dense", "dense1", ["flat1"], {"units": u1}),
            ("relu", "relu3", ["dense1"], {}),
            ("dropout", "drop3", ["relu3"], {"rate": rate}),
            ("dense", "dense2", ["flat2"], {"units": u1}),
            ("relu", "relu4", ["dense2"], {}),
            ("dropout", "drop4", ["relu4"], {"rate": rate}),
            ("dense", "dense3", ["drop3"], {"units": u2}),
            ("relu", "relu5", ["dense3"], {}),
            ("dropout", "drop5", ["relu5"], {"rate": rate}),
            ("dense", "dense4", ["drop4"], {"units": u2}),
            ("relu", "relu6", ["dense4"], {}),
            ("dropout", "drop6", ["relu6"], {"rate": rate}),
            ("concat", "concat", ["drop5", "drop6"], {}),
            ("dense", "dense5", ["concat"], {"units": spec.num_classes}),
            ("softmax", "softmax", ["dense5"], {}),
        ]
    return slots, steps


@dataclass
class ReportRow:
    name: str
    kind: str
    shape: object  # Shape4, int vector length, or None when not derivable
    status: str = "ok"  # ok | unbuildable | blocked
    reason: str | None = None


@dataclass
class ShapeReport:
    rows: list = field(default_factory=list)
    total_params: int | None = None

    @property
    def buildable(self) -> bool:
        return all(r.status == "ok" for r in self.rows)

    def row(self, name) -> ReportRow:
        return next(r for r in self.rows if r.name == name)


def _step_param_count(kind, cfg, in_shape):
    if kind == "conv":
        kh, kw, kd = cfg["kernel"]
        return cfg["filters"] * (in_shape.channels * kh * kw * kd) + cfg["filters"]
    if kind == "dense":
        return in_shape * cfg["units"] + cfg["units"]
    return 0


def _step_out_shape(kind, cfg, in_shapes):
    from .shapes import conv3d_output_shape, pool3d_output_shape

    if kind == "conv":
        return conv3d_output_shape(in_shapes[0], cfg["filters"], cfg["kernel"])
    if kind == "pool":
        return pool3d_output_shape(in_shapes[0], cfg["window"])
    if kind == "flatten":
        return in_shapes[0].count()
    if kind == "dense":
        return cfg["units"]
    if kind == "concat":
        return in_shapes[0] + in_shapes[1]
    return in_shapes[0]  # relu, dropout, softmax preserve shape


def shape_report(spec: ArchSpec) -> ShapeReport:
    """Static layer-by-layer shape inference; never allocates parameters.

    Layers whose input is too small are flagged unbuildable instead of
    raising, and everything downstream of the failure is marked blocked.
    """
    slots, steps = _layer_plan(spec)
    report = ShapeReport()
    shapes = {}
    for slot, shape in slots.items():
        shapes[slot] = shape
        report.rows.append(ReportRow(slot, "input", shape))
    total = 0
    broken = False
    for kind, name, inputs, cfg in steps:
        if broken or any(shapes.get(ref) is None for ref in inputs):
            report.rows.append(ReportRow(name, kind, None, "blocked", "upstream layer unbuildable"))
            shapes[name] = None
            continue
        try:
            out = _step_out_shape(kind, cfg, [shapes[ref] for ref in inputs])
        except ShapeError as e:
            report.rows.append(ReportRow(name, kind, None, "unbuildable", str(e)))
            shapes[name] = None
            broken = True
            continue
        total += _step_param_count(kind, cfg, shapes[inputs[0]])
        shapes[name] = out
        report.rows.append(ReportRow(name, kind, out))
    report.total_params = None if broken else total
    return report


def build_graph(spec: ArchSpec, dtype=np.float32) -> NetworkGraph:
    """Instantiate the architecture; raises ShapeError naming the first
    layer whose kernel does not fit its input."""
    slots, steps = _layer_plan(spec)
    shapes = dict(slots)
    nodes = []
    for kind, name, inputs, cfg in steps:
        in_shapes = [shapes[ref] for ref in inputs]
        if kind == "conv":
            c = in_shapes[0].channels
            kh, kw, kd = cfg["kernel"]
            w = Param(f"{name}.weights", np.zeros((cfg["filters"], c, kh, kw, kd), dtype=dtype))
            b = Param(f"{name}.bias", np.zeros(cfg["filters"], dtype=dtype))
            node = Conv3D(name, inputs, w, b)
        elif kind == "pool":
            node = MaxPool3D(name, inputs, cfg["window"])
        elif kind == "relu":
            node = ReLU(name, inputs)
        elif kind == "dropout":
            node = Dropout(name, inputs, cfg["rate"])
        elif kind == "flatten":
            node = Flatten(name, inputs)
        elif kind == "dense":
            n_in = in_shapes[0]
            w = Param(f"{name}.weights", np.zeros((n_in, cfg["units"]), dtype=dtype))
            b = Param(f"{name}.bias", np.zeros(cfg["units"], dtype=dtype))
            node = Dense(name, inputs, w, b)
        elif kind == "concat":
            node = Concat(name, inputs)
        elif kind == "softmax":
            node = SoftmaxOutput(name, inputs)
        else:  # pragma: no cover - plan kinds are closed
            raise AssertionError(kind)
        shapes[name] = node.out_shape(in_shapes)
        nodes.append(node)
    return NetworkGraph(slots, nodes)


def build_stcnn(spec: ArchSpec, dtype=np.float32) -> NetworkGraph:
    if spec.kind != "stcnn":
        raise ValueError(f"expected an stcnn spec, got kind {spec.kind!r}")
    return build_graph(spec, dtype)


def build_fuse_intermediate(spec: ArchSpec, dtype=np.float32) -> NetworkGraph:
    if spec.kind != "fuse_intermediate":
        raise ValueError(f"expected a fuse_intermediate spec, got kind {spec.kind!r}")
    return build_graph(spec, dtype)


def build_fuse_late(spec: ArchSpec, dtype=np.float32) -> NetworkGraph:
    if spec.kind != "fuse_late":
        raise ValueError(f"expected a fuse_late spec, got kind {spec.kind!r}")
    return build_graph(spec, dtype)


def param_count(graph: NetworkGraph) -> int:
    return sum(p.value.size for p in graph.params())


def init_params(graph: NetworkGraph, seed: int) -> None:
    """Fan-balanced uniform init: weights ~ U(-a, a), a = sqrt(6/(fan_in+fan_out));
    biases zero. Fully determined by the seed."""
    rng = np.random.default_rng(seed)
    for node in graph.nodes:
        if isinstance(node, Conv3D):
            f, c, kh, kw, kd = node.weights.value.shape
            fan_in = c * kh * kw * kd
            fan_out = f * kh * kw * kd
        elif isinstance(node, Dense):
            fan_in, fan_out = node.weights.value.shape
        else:
            continue
        a = math.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-a, a, size=node.weights.value.shape)
        node.weights.value[...] = w.astype(node.weights.value.dtype)
        node.bias.value.fill(0)
