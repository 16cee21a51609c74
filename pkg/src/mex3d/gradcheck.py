"""Finite-difference verification of the analytic gradients.

Central differences of the cross-entropy loss are compared against the
gradients produced by graph_backward, parameter block by parameter
block. Dropout masks are frozen by reseeding the rng before every
forward evaluation so the loss is a deterministic function of the
parameters.
"""

from __future__ import annotations

import numpy as np

from .graph import graph_backward, graph_forward

FLOOR = 1e-12


def finite_diff_check(graph, inputs, true_class, epsilon=1e-4, rng_seed=0, max_per_block=None):
    """Max relative error |analytic - numeric| / max(|analytic|, |numeric|, 1e-12) per block.

    Returns {"blocks": {param_name: max_rel_err}, "max": overall}. With
    max_per_block set, only that many (seeded-random) elements of each
    block are probed; otherwise every element is.
    """

    def loss_at_current_params():
        rng = np.random.default_rng(rng_seed)
        probs, _ = graph_forward(graph, inputs, mode="train", rng=rng)
        return -float(np.log(probs[true_class]))

    graph.zero_grads()
    rng = np.random.default_rng(rng_seed)
    probs, cache = graph_forward(graph, inputs, mode="train", rng=rng)
    graph_backward(graph, cache, true_class)

    picker = np.random.default_rng(rng_seed + 1)
    blocks = {}
    for param in graph.params():
        flat_value = param.value.reshape(-1)
        flat_grad = param.grad.reshape(-1)
        idx = np.arange(flat_value.size)
        if max_per_block is not None and flat_value.size > max_per_block:
            idx = np.sort(picker.choice(flat_value.size, size=max_per_block, replace=False))
        worst = 0.0
        for i in idx:
            orig = flat_value[i]
            flat_value[i] = orig + epsilon
            plus = loss_at_current_params()
            flat_value[i] = orig - epsilon
            minus = loss_at_current_params()
            flat_value[i] = orig
            numeric = (plus - minus) / (2.0 * epsilon)
            analytic = float(flat_grad[i])
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), FLOOR)
            worst = max(worst, rel)
        blocks[param.name] = worst
    return {"blocks": blocks, "max": max(blocks.values()) if blocks else 0.0}
