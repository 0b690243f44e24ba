import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from iirnn.errors import TrainingError, UsageError
from iirnn.models.common import RecommendationList, Variant
from iirnn.models.corpus import Session
from iirnn.nets.inter import inter_backward_batch, inter_forward, inter_forward_batch
from iirnn.nets.intra import (
    SessionBatch,
    intra_backward_batch,
    intra_forward,
    intra_forward_batch,
)
from iirnn.nets.params import ModelParams
from iirnn.nets.repr import (
    SessionRepr,
    UserReprBuffer,
    session_repr_avg,
    session_repr_lhs,
)
from iirnn.numerics.arrays import DenseArray
from iirnn.numerics.layers import (
    output_layer_backward,
    output_layer_forward,
    softmax_cross_entropy,
)
from iirnn.numerics.ranking import top_k

logger = logging.getLogger(__name__)


@dataclass
class BatchResult:
    loss: float
    grads: dict[str, DenseArray]
    final_states: DenseArray


def batch_loss_and_grads(
    params: ModelParams,
    sessions: Sequence[Sequence[int]],
    buffers: Sequence[Sequence[SessionRepr]],
    keep_prob: float = 1.0,
    rng: np.random.Generator | None = None,
) -> BatchResult:
    """Mean over sessions of each session's mean next-item cross-entropy.

    Row b predicts ``sessions[b][t + 1]`` after ``sessions[b][: t + 1]``
    from the initial state the inter level derives from ``buffers[b]``.
    ``final_states`` are the top intra states after each whole session.
    """
    if len(sessions) != len(buffers):
        raise UsageError("one buffer per session is required")
    if any(len(s) < 2 for s in sessions):
        raise UsageError("training sessions need at least two items")

    batch = SessionBatch.from_sessions(sessions, params.num_items, params.dtype)
    size = batch.size

    # --- Forward ---
    h0, inter = inter_forward_batch(params, buffers, keep_prob, rng)
    intra = intra_forward_batch(params, batch, h0, keep_prob, rng)

    rows, steps = np.nonzero(batch.step_mask[:, 1:] > 0)
    hidden = intra.states[rows, steps]
    logits = output_layer_forward(hidden, params.output_w, params.output_b)
    targets = batch.items[rows, steps + 1]
    losses, grad_logits = softmax_cross_entropy(logits, targets)
    weights = 1.0 / ((batch.lengths[rows] - 1) * size)
    loss = float(np.sum(weights * losses))
    if not np.isfinite(loss):
        raise TrainingError("non-finite loss")

    # --- Backward ---
    grads = params.zero_grads()
    grad_logits = grad_logits * weights[:, None].astype(params.dtype)
    grad_hidden, grad_w, grad_b = output_layer_backward(
        grad_logits, hidden, params.output_w
    )
    grads["output.w"] += grad_w
    grads["output.b"] += grad_b
    grad_states = np.zeros_like(intra.states)
    grad_states[rows, steps] = grad_hidden
    grad_h0 = intra_backward_batch(params, intra, grad_states, grads)
    if inter is not None:
        inter_backward_batch(params, inter, grad_h0, grads)

    return BatchResult(loss=loss, grads=grads, final_states=intra.final_states)


def session_loss_and_grads(
    buffer: Sequence[SessionRepr],
    session: Sequence[int],
    params: ModelParams,
    keep_prob: float = 1.0,
    rng: np.random.Generator | None = None,
) -> tuple[float, dict[str, DenseArray]]:
    result = batch_loss_and_grads(params, [session], [buffer], keep_prob, rng)
    return result.loss, result.grads


def session_repr(
    params: ModelParams,
    items: Sequence[int],
    final_state: DenseArray,
    session_start: int,
) -> SessionRepr:
    if params.variant is Variant.II_AP:
        return session_repr_avg(items, params.embeddings, session_start)
    return session_repr_lhs(final_state, session_start)


def session_logits(
    buffer: Sequence[SessionRepr], items: Sequence[int], params: ModelParams
) -> tuple[DenseArray, DenseArray]:
    """Teacher-forced scores after every item of ``items`` plus the final state."""
    out = intra_forward(items, inter_forward(buffer, params), params)
    return out.logits, out.final


def session_loss(
    buffer: Sequence[SessionRepr], items: Sequence[int], params: ModelParams
) -> tuple[float, DenseArray]:
    """Eval-mode mean cross-entropy of a session and its final state."""
    if len(items) < 2:
        raise UsageError("a session needs at least two items to score")
    logits, final = session_logits(buffer, items, params)
    losses, _ = softmax_cross_entropy(logits[:-1], np.asarray(items[1:]))
    return float(np.mean(losses)), final


def predict_next(
    buffer: Sequence[SessionRepr],
    prefix: Sequence[int],
    k: int,
    params: ModelParams,
) -> RecommendationList:
    """Top-k items to follow ``prefix``; ties go to the lower id."""
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if k > params.num_items:
        logger.warning("k=%d exceeds %d items; clipping", k, params.num_items)
        k = params.num_items
    logits, _ = session_logits(buffer, prefix, params)
    return top_k(logits[-1], k)


def replay_buffer(
    buffer: UserReprBuffer, sessions: Sequence[Session], params: ModelParams
) -> UserReprBuffer:
    """Append the representation of each completed session, oldest first."""
    if not params.variant.uses_inter:
        return buffer
    for session in sessions:
        if params.variant is Variant.II_AP:
            final = np.zeros(params.h, dtype=params.dtype)
        else:
            _, final = session_logits(buffer, session.items, params)
        buffer.append(session_repr(params, session.items, final, session.start_time))
    return buffer
