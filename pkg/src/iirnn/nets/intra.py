"""Intra-session level: embed items, run the GRU stack, score every item."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from iirnn.errors import InferenceError
from iirnn.nets.params import ModelParams
from iirnn.numerics.arrays import DenseArray
from iirnn.numerics.gru import (
    SequenceCache,
    gru_sequence_backward,
    gru_sequence_forward,
)
from iirnn.numerics.layers import make_dropout_mask, output_layer_forward


@dataclass
class SessionBatch:
    """Right-padded item ids (B, T) with a step mask; id 0 is padding."""

    items: np.ndarray
    step_mask: DenseArray
    lengths: np.ndarray

    @property
    def size(self) -> int:
        return self.items.shape[0]

    @classmethod
    def from_sessions(
        cls, sessions: Sequence[Sequence[int]], num_items: int, dtype: np.dtype
    ) -> "SessionBatch":
        lengths = np.array([len(s) for s in sessions], dtype=np.int64)
        steps = int(lengths.max()) if len(lengths) else 0
        items = np.zeros((len(sessions), steps), dtype=np.int64)
        for b, session in enumerate(sessions):
            items[b, : len(session)] = session
        step_mask = (np.arange(steps)[None, :] < lengths[:, None]).astype(dtype)
        valid = items[step_mask > 0]
        if valid.size and (valid.min() < 1 or valid.max() > num_items):
            raise InferenceError(f"item id outside 1..{num_items} in {sessions!r}")
        return cls(items, step_mask, lengths)


@dataclass
class IntraPass:
    batch: SessionBatch
    states: DenseArray
    caches: list[SequenceCache]

    @property
    def final_states(self) -> DenseArray:
        # masked steps carry state, so the last column is each row's final state
        return self.states[:, -1]


def dropout_masks(
    shape: tuple[int, ...],
    keep_prob: float,
    rng: np.random.Generator | None,
    dtype: np.dtype,
) -> DenseArray | None:
    if rng is None or keep_prob >= 1.0:
        return None
    return make_dropout_mask(shape, keep_prob, rng, dtype)


def intra_forward_batch(
    params: ModelParams,
    batch: SessionBatch,
    h0: DenseArray,
    keep_prob: float = 1.0,
    rng: np.random.Generator | None = None,
) -> IntraPass:
    """Run every intra layer from ``h0``; the same ``h0`` seeds each layer."""
    x = params.embeddings[batch.items]
    b, t = batch.items.shape
    caches: list[SequenceCache] = []
    for layer in params.intra:
        masks = dropout_masks((b, t, params.h), keep_prob, rng, params.dtype)
        x, cache = gru_sequence_forward(x, h0, layer, batch.step_mask, masks)
        caches.append(cache)
    return IntraPass(batch, x, caches)


def intra_backward_batch(
    params: ModelParams,
    intra: IntraPass,
    grad_states: DenseArray,
    grads: dict[str, DenseArray],
) -> DenseArray:
    """Accumulate intra and embedding gradients; return the gradient of ``h0``."""
    grad_h0 = np.zeros((intra.batch.size, params.h), dtype=grad_states.dtype)
    grad = grad_states
    for i in range(len(params.intra) - 1, -1, -1):
        grad, layer_grad_h0, layer_grads = gru_sequence_backward(grad, intra.caches[i])
        grad_h0 += layer_grad_h0
        for name, arr in layer_grads.named().items():
            grads[f"intra.{i}.{name}"] += arr
    np.add.at(grads["embeddings"], intra.batch.items, grad)
    grads["embeddings"][0] = 0.0
    return grad_h0


@dataclass
class IntraOutput:
    logits: DenseArray
    hidden: DenseArray
    final: DenseArray


def intra_forward(
    prefix: Sequence[int],
    h0: DenseArray,
    params: ModelParams,
    train_mode: bool = False,
    keep_prob: float = 1.0,
    rng: np.random.Generator | None = None,
) -> IntraOutput:
    """Scores for the item after each prefix position.

    ``logits[t]`` is computed after consuming ``prefix[t]``.
    """
    batch = SessionBatch.from_sessions([list(prefix)], params.num_items, params.dtype)
    if batch.items.shape[1] == 0:
        raise InferenceError("empty prefix")
    if not train_mode:
        rng = None
    intra = intra_forward_batch(params, batch, h0[None, :], keep_prob, rng)
    hidden = intra.states[0]
    logits = output_layer_forward(hidden, params.output_w, params.output_b)
    return IntraOutput(logits=logits, hidden=hidden, final=hidden[-1])
