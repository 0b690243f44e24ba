"""Dense-array building blocks: GRU cell, output layer, loss, Adam."""

from iirnn.numerics.adam import Adam, AdamState, adam_step, clip_by_global_norm
from iirnn.numerics.gradcheck import gradient_check
from iirnn.numerics.gru import (
    GruCache,
    GruParams,
    SequenceCache,
    gru_cell_backward,
    gru_cell_forward,
    gru_sequence_backward,
    gru_sequence_forward,
)
from iirnn.numerics.layers import (
    make_dropout_mask,
    output_layer_backward,
    output_layer_forward,
    softmax_cross_entropy,
)
from iirnn.numerics.ranking import top_k

__all__ = [
    "Adam",
    "AdamState",
    "GruCache",
    "GruParams",
    "SequenceCache",
    "adam_step",
    "clip_by_global_norm",
    "gradient_check",
    "gru_cell_backward",
    "gru_cell_forward",
    "gru_sequence_backward",
    "gru_sequence_forward",
    "make_dropout_mask",
    "output_layer_backward",
    "output_layer_forward",
    "softmax_cross_entropy",
    "top_k",
]
