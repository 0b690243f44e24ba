"""Intra-session RNN and the inter-intra extension."""

from iirnn.nets.inter import inter_forward
from iirnn.nets.intra import IntraOutput, intra_forward
from iirnn.nets.model import (
    BatchResult,
    batch_loss_and_grads,
    predict_next,
    replay_buffer,
    session_logits,
    session_loss,
    session_loss_and_grads,
    session_repr,
)
from iirnn.nets.params import ModelParams
from iirnn.nets.recommender import RnnRecommender
from iirnn.nets.repr import (
    SessionRepr,
    UserReprBuffer,
    session_repr_avg,
    session_repr_lhs,
)

__all__ = [
    "BatchResult",
    "IntraOutput",
    "ModelParams",
    "RnnRecommender",
    "SessionRepr",
    "UserReprBuffer",
    "batch_loss_and_grads",
    "inter_forward",
    "intra_forward",
    "predict_next",
    "replay_buffer",
    "session_logits",
    "session_loss",
    "session_loss_and_grads",
    "session_repr",
    "session_repr_avg",
    "session_repr_lhs",
]
