from dataclasses import dataclass, field
from enum import StrEnum


class Variant(StrEnum):
    INTRA_ONLY = "intra"
    II_AP = "ii-ap"
    II_LHS = "ii-lhs"

    @property
    def uses_inter(self) -> bool:
        return self is not Variant.INTRA_ONLY

    @property
    def model_name(self) -> str:
        names = {
            Variant.INTRA_ONLY: "intra-rnn",
            Variant.II_AP: "ii-rnn-ap",
            Variant.II_LHS: "ii-rnn-lhs",
        }
        return names[self]


@dataclass
class RecommendationList:
    """Top-k item ids, best first, with the scores that ranked them."""

    items: list[int] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.items)

    def rank_of(self, item: int) -> int | None:
        try:
            return self.items.index(item) + 1
        except ValueError:
            return None

    def truncated(self, k: int) -> "RecommendationList":
        return RecommendationList(self.items[:k], self.scores[:k])
