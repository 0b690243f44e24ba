import numpy as np

from iirnn.models.common import RecommendationList


def top_k(scores: np.ndarray, k: int, offset: int = 1) -> RecommendationList:
    """Rank ``scores`` descending, ties by ascending index.

    ``offset`` turns a column index into an item id (ids start at 1).
    """
    n = scores.shape[0]
    k = min(k, n)
    if k <= 0:
        return RecommendationList()
    if k < n:
        kth = np.partition(-scores, k - 1)[k - 1]
        candidates = np.flatnonzero(-scores <= kth)
    else:
        candidates = np.arange(n)
    order = np.lexsort((candidates, -scores[candidates]))[:k]
    chosen = candidates[order]
    return RecommendationList(
        items=[int(i) + offset for i in chosen],
        scores=[float(scores[i]) for i in chosen],
    )
