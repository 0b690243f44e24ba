"""Inter-session level: the GRU over recent session representations."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from iirnn.errors import ConfigError
from iirnn.models.common import Variant
from iirnn.nets.intra import dropout_masks
from iirnn.nets.params import ModelParams
from iirnn.nets.repr import SessionRepr
from iirnn.numerics.arrays import DenseArray
from iirnn.numerics.gru import (
    SequenceCache,
    gru_sequence_backward,
    gru_sequence_forward,
)


@dataclass
class InterPass:
    slots: list[list[SessionRepr | None]]
    caches: list[SequenceCache]


def _representation(rep: SessionRepr, params: ModelParams) -> DenseArray:
    if params.variant is Variant.II_AP and rep.items is not None:
        return params.embeddings[np.asarray(rep.items, dtype=np.int64)].mean(axis=0)
    if rep.width != params.repr_width:
        raise ConfigError(
            f"{params.variant} expects representations of width "
            f"{params.repr_width}, got {rep.width}"
        )
    return rep.vector.astype(params.dtype)


def inter_forward_batch(
    params: ModelParams,
    buffers: Sequence[Sequence[SessionRepr]],
    keep_prob: float = 1.0,
    rng: np.random.Generator | None = None,
) -> tuple[DenseArray, InterPass | None]:
    """Initial intra states (B, h); zero rows for empty buffers.

    Buffers are left-padded to a common length so the last step is every
    row's most recent session.
    """
    size = len(buffers)
    if not params.variant.uses_inter:
        return np.zeros((size, params.h), dtype=params.dtype), None

    steps = max((len(buf) for buf in buffers), default=0) or 1
    xs = np.zeros((size, steps, params.repr_width), dtype=params.dtype)
    step_mask = np.zeros((size, steps), dtype=params.dtype)
    slots: list[list[SessionRepr | None]] = []
    for b, buf in enumerate(buffers):
        reprs = list(buf)
        row: list[SessionRepr | None] = [None] * (steps - len(reprs)) + reprs
        for t, rep in enumerate(row):
            if rep is not None:
                xs[b, t] = _representation(rep, params)
                step_mask[b, t] = 1.0
        slots.append(row)

    h0 = np.zeros((size, params.h), dtype=params.dtype)
    caches: list[SequenceCache] = []
    x = xs
    for layer in params.inter:
        masks = dropout_masks((size, steps, params.h), keep_prob, rng, params.dtype)
        x, cache = gru_sequence_forward(x, h0, layer, step_mask, masks)
        caches.append(cache)
    return x[:, -1], InterPass(slots, caches)


def inter_backward_batch(
    params: ModelParams,
    inter: InterPass,
    grad_h0: DenseArray,
    grads: dict[str, DenseArray],
) -> None:
    """Accumulate inter gradients; pooled representations pass theirs on to
    the embeddings of the pooled items."""
    size, steps = grad_h0.shape[0], len(inter.slots[0])
    grad = np.zeros((size, steps, params.h), dtype=grad_h0.dtype)
    top = len(params.inter) - 1
    for i in range(top, -1, -1):
        grad, _, layer_grads = gru_sequence_backward(
            grad, inter.caches[i], grad_h_last=grad_h0 if i == top else None
        )
        for name, arr in layer_grads.named().items():
            grads[f"inter.{i}.{name}"] += arr

    if params.variant is not Variant.II_AP:
        return
    for b, row in enumerate(inter.slots):
        for t, rep in enumerate(row):
            if rep is None or rep.items is None:
                continue
            ids = np.asarray(rep.items, dtype=np.int64)
            np.add.at(grads["embeddings"], ids, grad[b, t] / len(ids))
    grads["embeddings"][0] = 0.0


def inter_forward(buffer: Sequence[SessionRepr], params: ModelParams) -> DenseArray:
    """Initial hidden state for a user's next session (eval mode)."""
    h0, _ = inter_forward_batch(params, [buffer])
    return h0[0]
