import zlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from iirnn.models.common import RecommendationList
from iirnn.models.corpus import Session, UserHistory


@dataclass(frozen=True)
class RecentStack:
    """Move-to-front list of distinct items, most recent first."""

    items: tuple[int, ...] = field(default_factory=tuple)

    @classmethod
    def initial(
        cls, k: int, num_items: int, rng: np.random.Generator
    ) -> "RecentStack":
        """``k`` distinct random items, uniform without replacement."""
        k = min(k, num_items)
        drawn = rng.choice(num_items, size=k, replace=False) + 1
        return cls(tuple(int(i) for i in drawn))

    def as_recommendations(self) -> RecommendationList:
        k = len(self.items)
        return RecommendationList(
            items=list(self.items), scores=[float(k - i) for i in range(k)]
        )


def most_recent_step(stack: RecentStack, observed_item: int) -> RecentStack:
    """Push ``observed_item`` to the top; the bottom item falls off when new."""
    rest = [i for i in stack.items if i != observed_item]
    if len(rest) == len(stack.items):
        rest = rest[:-1]
    return RecentStack((observed_item, *rest))


class MostRecent:
    """The stack restarts from random items at every session."""

    name = "most-recent"

    def __init__(self, num_items: int, seed: int = 0) -> None:
        self.num_items = num_items
        self.seed = seed

    def user_context(self, history: UserHistory) -> Any:
        return zlib.crc32(history.user.encode("utf-8"))

    def recommend_session(
        self, context: Any, session: Session, k: int
    ) -> list[RecommendationList]:
        rng = np.random.default_rng([self.seed, int(context), session.start_time])
        stack = RecentStack.initial(k, self.num_items, rng)
        out = []
        for item in session.items[:-1]:
            stack = most_recent_step(stack, item)
            out.append(stack.as_recommendations())
        return out
