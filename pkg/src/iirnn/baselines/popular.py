from dataclasses import dataclass
from typing import Any

import numpy as np

from iirnn.models.common import RecommendationList
from iirnn.models.corpus import Corpus, Session, UserHistory


@dataclass
class PopularityTable:
    """Training occurrence counts by item id (index 0 unused)."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        ids = np.arange(1, self.counts.shape[0])
        # descending count, then ascending id
        self.order = ids[np.lexsort((ids, -self.counts[1:]))]

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "PopularityTable":
        counts = np.zeros(corpus.num_items + 1, dtype=np.int64)
        for history in corpus.users:
            for session in history.train_sessions:
                np.add.at(counts, np.asarray(session.items, dtype=np.int64), 1)
        return cls(counts)

    @property
    def num_items(self) -> int:
        return self.counts.shape[0] - 1

    def count(self, item: int) -> int:
        return int(self.counts[item])


def most_popular_recommend(table: PopularityTable, k: int) -> RecommendationList:
    top = table.order[:k]
    return RecommendationList(
        items=[int(i) for i in top], scores=[float(table.counts[i]) for i in top]
    )


class MostPopular:
    name = "most-popular"

    def __init__(self, table: PopularityTable) -> None:
        self.table = table

    def user_context(self, history: UserHistory) -> Any:
        return None

    def recommend_session(
        self, context: Any, session: Session, k: int
    ) -> list[RecommendationList]:
        recs = most_popular_recommend(self.table, k)
        return [recs] * (len(session) - 1)
