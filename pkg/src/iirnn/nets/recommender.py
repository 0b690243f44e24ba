from typing import Any

from iirnn.models.common import RecommendationList
from iirnn.models.corpus import Session, UserHistory
from iirnn.nets.model import replay_buffer, session_logits, session_repr
from iirnn.nets.params import ModelParams
from iirnn.nets.repr import UserReprBuffer
from iirnn.numerics.ranking import top_k


class RnnRecommender:
    """Evaluator adapter for a trained intra or inter-intra model.

    A user's buffer is first rebuilt from their training sessions and then
    extended with each test session once it has been scored.
    """

    def __init__(self, params: ModelParams, g: int, name: str | None = None) -> None:
        self.params = params
        self.g = g
        self.name = name or params.variant.model_name

    def user_context(self, history: UserHistory) -> Any:
        return replay_buffer(
            UserReprBuffer(self.g), history.train_sessions, self.params
        )

    def recommend_session(
        self, context: Any, session: Session, k: int
    ) -> list[RecommendationList]:
        buffer: UserReprBuffer = context
        k = min(k, self.params.num_items)
        logits, final = session_logits(buffer, session.items, self.params)
        recs = [top_k(logits[t], k) for t in range(len(session) - 1)]
        if self.params.variant.uses_inter:
            buffer.append(
                session_repr(self.params, session.items, final, session.start_time)
            )
        return recs
