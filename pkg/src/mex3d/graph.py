"""Layer nodes and the network graph with forward and reverse passes.

A NetworkGraph is a topologically ordered DAG of layer nodes fed by one
or two named input slots and ending in a single SoftmaxOutput node.
Activations and per-node state (dropout masks, pool argmaxes) are cached
per forward call, never on the nodes, so read-only graphs can serve any
number of concurrent infer-mode forwards.
"""

from __future__ import annotations

import numpy as np

from . import kernels, ops
from .shapes import Shape4, ShapeError


class Param:
    """A named learnable tensor with a same-shaped gradient buffer."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name, value):
        self.name = name
        self.value = np.ascontiguousarray(value)
        self.grad = np.zeros_like(self.value)

    def zero_grad(self):
        self.grad.fill(0)

    def __repr__(self):
        return f"Param({self.name!r}, shape={self.value.shape})"


class Node:
    kind = "node"

    def __init__(self, name, inputs):
        self.name = name
        self.inputs = list(inputs)

    def params(self):
        return []

    def out_shape(self, in_shapes):
        """Static shape inference; in_shapes entries are Shape4 or int (vector)."""
        raise NotImplementedError

    def forward(self, xs, mode, rng):
        raise NotImplementedError

    def backward(self, gy, cache, accumulate_params=True):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


def _require_shape4(shape, node):
    if not isinstance(shape, Shape4):
        raise ShapeError(f"node '{node}' needs a 4-D input, got a vector of length {shape}")
    return shape


def _require_vector(shape, node):
    if isinstance(shape, Shape4):
        raise ShapeError(f"node '{node}' needs a vector input, got shape {tuple(shape)}")
    return int(shape)


class Conv3D(Node):
    kind = "conv3d"

    def __init__(self, name, inputs, weights: Param, bias: Param):
        super().__init__(name, inputs)
        self.weights = weights
        self.bias = bias

    @property
    def filters(self):
        return self.weights.value.shape[0]

    @property
    def kernel(self):
        return tuple(self.weights.value.shape[2:])

    def params(self):
        return [self.weights, self.bias]

    def out_shape(self, in_shapes):
        from .shapes import conv3d_output_shape

        s = _require_shape4(in_shapes[0], self.name)
        if s.channels != self.weights.value.shape[1]:
            raise ShapeError(
                f"node '{self.name}': weight channels {self.weights.value.shape[1]} "
                f"!= input channels {s.channels}"
            )
        try:
            return conv3d_output_shape(s, self.filters, self.kernel)
        except ShapeError as e:
            raise ShapeError(f"node '{self.name}': {e}") from None

    def forward(self, xs, mode, rng):
        y = kernels.conv3d_forward(xs[0], self.weights.value, self.bias.value)
        return y, xs[0]

    def backward(self, gy, cache, accumulate_params=True):
        gx, gw, gb = kernels.conv3d_backward(cache, self.weights.value, gy)
        if accumulate_params:
            self.weights.grad += gw
            self.bias.grad += gb
        return [gx]


class MaxPool3D(Node):
    kind = "maxpool3d"

    def __init__(self, name, inputs, window):
        super().__init__(name, inputs)
        self.window = tuple(int(v) for v in window)

    def out_shape(self, in_shapes):
        from .shapes import pool3d_output_shape

        return pool3d_output_shape(_require_shape4(in_shapes[0], self.name), self.window)

    def forward(self, xs, mode, rng):
        y, argmax = kernels.maxpool3d_forward(xs[0], self.window)
        return y, (argmax, xs[0].shape)

    def backward(self, gy, cache, accumulate_params=True):
        argmax, in_shape = cache
        return [kernels.maxpool3d_backward(argmax, gy, in_shape)]


class ReLU(Node):
    kind = "relu"

    def out_shape(self, in_shapes):
        return in_shapes[0]

    def forward(self, xs, mode, rng):
        return ops.relu_forward(xs[0]), xs[0]

    def backward(self, gy, cache, accumulate_params=True):
        return [ops.relu_backward(cache, gy)]


class Dropout(Node):
    kind = "dropout"

    def __init__(self, name, inputs, rate):
        super().__init__(name, inputs)
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"node '{name}': dropout rate must be in [0, 1), got {rate}")
        self.rate = float(rate)

    def out_shape(self, in_shapes):
        return in_shapes[0]

    def forward(self, xs, mode, rng):
        y, mask = ops.dropout_forward(xs[0], self.rate, mode, rng)
        return y, mask

    def backward(self, gy, cache, accumulate_params=True):
        return [ops.dropout_backward(gy, self.rate, cache)]


class Flatten(Node):
    kind = "flatten"

    def out_shape(self, in_shapes):
        return _require_shape4(in_shapes[0], self.name).count()

    def forward(self, xs, mode, rng):
        return ops.flatten(xs[0]), xs[0].shape

    def backward(self, gy, cache, accumulate_params=True):
        return [ops.flatten_backward(gy, cache)]


class Dense(Node):
    kind = "dense"

    def __init__(self, name, inputs, weights: Param, bias: Param):
        super().__init__(name, inputs)
        self.weights = weights
        self.bias = bias

    @property
    def in_features(self):
        return self.weights.value.shape[0]

    @property
    def out_features(self):
        return self.weights.value.shape[1]

    def params(self):
        return [self.weights, self.bias]

    def out_shape(self, in_shapes):
        n = _require_vector(in_shapes[0], self.name)
        if n != self.in_features:
            raise ShapeError(
                f"node '{self.name}': input length {n} != weight rows {self.in_features}"
            )
        return self.out_features

    def forward(self, xs, mode, rng):
        return ops.dense_forward(xs[0], self.weights.value, self.bias.value), xs[0]

    def backward(self, gy, cache, accumulate_params=True):
        gx, gw, gb = ops.dense_backward(cache, self.weights.value, gy)
        if accumulate_params:
            self.weights.grad += gw
            self.bias.grad += gb
        return [gx]


class Concat(Node):
    kind = "concat"

    def out_shape(self, in_shapes):
        a = _require_vector(in_shapes[0], self.name)
        b = _require_vector(in_shapes[1], self.name)
        return a + b

    def forward(self, xs, mode, rng):
        return ops.concat(xs[0], xs[1]), len(xs[0])

    def backward(self, gy, cache, accumulate_params=True):
        return list(ops.concat_backward(gy, cache))


class SoftmaxOutput(Node):
    kind = "softmax"

    def out_shape(self, in_shapes):
        return _require_vector(in_shapes[0], self.name)

    def forward(self, xs, mode, rng):
        return ops.softmax(xs[0]), None

    def backward(self, gy, cache, accumulate_params=True):
        raise RuntimeError("SoftmaxOutput is differentiated jointly with the loss")


class NetworkGraph:
    """Topologically ordered layer nodes over 1 or 2 named input slots."""

    def __init__(self, input_slots: dict[str, Shape4], nodes: list[Node]):
        if not 1 <= len(input_slots) <= 2:
            raise ValueError(f"graph needs 1 or 2 input slots, got {len(input_slots)}")
        self.input_slots = dict(input_slots)
        self.nodes = list(nodes)
        self._by_name = {}
        self._validate()

    def _validate(self):
        known = set(self.input_slots)
        for node in self.nodes:
            if node.name in known:
                raise ValueError(f"duplicate node name {node.name!r}")
            expected = 2 if node.kind == "concat" else 1
            if len(node.inputs) != expected:
                raise ValueError(f"node '{node.name}' needs {expected} input(s), has {len(node.inputs)}")
            for ref in node.inputs:
                if ref not in known:
                    raise ValueError(f"node '{node.name}' references unknown input {ref!r}")
            known.add(node.name)
            self._by_name[node.name] = node
        softmaxes = [n for n in self.nodes if n.kind == "softmax"]
        if len(softmaxes) != 1 or self.nodes[-1].kind != "softmax":
            raise ValueError("graph must end in exactly one SoftmaxOutput node")

    def node(self, name) -> Node:
        return self._by_name[name]

    def params(self) -> list[Param]:
        return [p for node in self.nodes for p in node.params()]

    def zero_grads(self):
        for p in self.params():
            p.zero_grad()

    def has_dropout(self):
        return any(n.kind == "dropout" and n.rate > 0 for n in self.nodes)

    def num_classes(self):
        node = self._by_name[self.nodes[-1].inputs[0]]
        while not isinstance(node, Dense):
            node = self._by_name[node.inputs[0]]
        return node.out_features


def graph_forward(graph, inputs, mode="infer", rng=None):
    """Run every node in topological order; returns (class_probs, cache).

    inputs maps slot name -> (1-channel) 4-D array matching the declared
    entry shape. The cache holds everything the backward pass needs.
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
    if set(inputs) != set(graph.input_slots):
        raise ShapeError(
            f"graph inputs {sorted(inputs)} do not match declared slots {sorted(graph.input_slots)}"
        )
    if mode == "train" and rng is None and graph.has_dropout():
        raise ValueError("train-mode forward through dropout requires an rng")

    values = {}
    for slot, shape in graph.input_slots.items():
        x = np.ascontiguousarray(inputs[slot])
        if tuple(x.shape) != tuple(shape):
            raise ShapeError(f"input '{slot}' shape {tuple(x.shape)} != declared {tuple(shape)}")
        values[slot] = x

    node_cache = {}
    out = None
    for node in graph.nodes:
        xs = [values[ref] for ref in node.inputs]
        try:
            out, nc = node.forward(xs, mode, rng)
        except ShapeError as e:
            raise ShapeError(f"node '{node.name}': {e}") from None
        values[node.name] = out
        node_cache[node.name] = nc
    cache = {"mode": mode, "node": node_cache, "probs": out}
    return out, cache


def _backprop(graph, cache, logit_grad, accumulate_params=True):
    """Reverse walk seeded with a gradient w.r.t. the logits.

    Returns the gradient w.r.t. each input slot. Param gradients are
    accumulated (added) in reverse topological order when requested.
    """
    grads = {graph.nodes[-1].inputs[0]: logit_grad}
    for node in reversed(graph.nodes[:-1]):
        gy = grads.pop(node.name, None)
        if gy is None:
            continue
        gxs = node.backward(gy, cache["node"][node.name], accumulate_params)
        for ref, gx in zip(node.inputs, gxs):
            if ref in grads:
                grads[ref] = grads[ref] + gx
            else:
                grads[ref] = gx
    return {slot: grads.get(slot) for slot in graph.input_slots}


def graph_backward(graph, cache, true_class):
    """Backprop the cross-entropy loss; accumulates into every Param.grad."""
    if not cache or "probs" not in cache:
        raise ValueError("graph_backward needs the cache of a preceding forward call")
    probs = cache["probs"]
    seed = ops.softmax_xent_grad(probs, true_class)
    return _backprop(graph, cache, seed, accumulate_params=True)
