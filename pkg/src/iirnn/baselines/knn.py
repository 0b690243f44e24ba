import logging
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence
from typing import Any

from iirnn.baselines.base import pad_with
from iirnn.baselines.popular import PopularityTable, most_popular_recommend
from iirnn.models.common import RecommendationList
from iirnn.models.corpus import Corpus, Session, UserHistory

logger = logging.getLogger(__name__)


class CoOccurrenceMatrix:
    """c(a, b): number of sessions containing both a and b."""

    def __init__(self) -> None:
        self._counts: defaultdict[int, Counter[int]] = defaultdict(Counter)

    def add_session(self, items: Iterable[int]) -> None:
        distinct = sorted(set(items))
        for idx, a in enumerate(distinct):
            for b in distinct[idx + 1 :]:
                self._counts[a][b] += 1
                self._counts[b][a] += 1

    def count(self, a: int, b: int) -> int:
        if a == b:
            return 0
        row = self._counts.get(a)
        return row[b] if row else 0

    def neighbours(self, item: int) -> Counter[int]:
        return self._counts.get(item, Counter())

    def __contains__(self, item: object) -> bool:
        return item in self._counts


def build_cooccurrence(sessions: Iterable[Sequence[int]]) -> CoOccurrenceMatrix:
    matrix = CoOccurrenceMatrix()
    for items in sessions:
        matrix.add_session(items)
    return matrix


def item_knn_recommend(
    matrix: CoOccurrenceMatrix,
    last_item: int,
    k: int,
    popularity: PopularityTable,
) -> RecommendationList:
    """Top-k co-occurring items; ties by popularity, then id.

    Falls back to (or pads with) the most popular items.
    """
    popular = most_popular_recommend(popularity, 2 * k)
    neighbours = matrix.neighbours(last_item)
    if not neighbours:
        logger.info("Item %d has no co-occurrences; using most popular", last_item)
        return pad_with(RecommendationList(), popular, k)
    ranked = sorted(
        neighbours.items(),
        key=lambda kv: (-kv[1], -popularity.count(kv[0]), kv[0]),
    )[:k]
    recs = RecommendationList(
        items=[item for item, _ in ranked], scores=[float(c) for _, c in ranked]
    )
    return pad_with(recs, popular, k)


class ItemKnn:
    name = "item-knn"

    def __init__(self, matrix: CoOccurrenceMatrix, popularity: PopularityTable) -> None:
        self.matrix = matrix
        self.popularity = popularity

    @classmethod
    def fit(cls, corpus: Corpus) -> "ItemKnn":
        sessions = (s.items for u in corpus.users for s in u.train_sessions)
        return cls(build_cooccurrence(sessions), PopularityTable.from_corpus(corpus))

    def user_context(self, history: UserHistory) -> Any:
        return None

    def recommend_session(
        self, context: Any, session: Session, k: int
    ) -> list[RecommendationList]:
        return [
            item_knn_recommend(self.matrix, item, k, self.popularity)
            for item in session.items[:-1]
        ]
