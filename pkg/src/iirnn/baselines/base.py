from typing import Any, Protocol

from iirnn.models.common import RecommendationList
from iirnn.models.corpus import Session, UserHistory


class SessionRecommender(Protocol):
    """Anything the evaluator can query step by step.

    ``user_context`` is called once per user before their test sessions;
    the context it returns is passed back for each of those sessions in
    order and may be updated by ``recommend_session``.
    """

    name: str

    def user_context(self, history: UserHistory) -> Any: ...

    def recommend_session(
        self, context: Any, session: Session, k: int
    ) -> list[RecommendationList]:
        """One list per prediction: list j-1 follows ``session.items[:j]``."""
        ...


def pad_with(
    recs: RecommendationList, fallback: RecommendationList, k: int
) -> RecommendationList:
    """Fill ``recs`` up to ``k`` entries from ``fallback``, skipping duplicates."""
    if len(recs) >= k:
        return recs.truncated(k)
    items = list(recs.items)
    scores = list(recs.scores)
    seen = set(items)
    floor = min(scores, default=0.0)
    for item in fallback.items:
        if len(items) >= k:
            break
        if item not in seen:
            items.append(item)
            scores.append(floor)
            seen.add(item)
    return RecommendationList(items, scores)
