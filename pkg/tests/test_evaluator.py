from typing import Any

import numpy as np
import pytest

from iirnn.errors import UsageError
from iirnn.evaluation import evaluate
from iirnn.evaluation.evaluator import report_from_ranks, session_ranks
from iirnn.models.common import RecommendationList
from iirnn.models.corpus import Session, UserHistory


class Oracle:
    """Ranks the true next item first."""

    name = "oracle"

    def user_context(self, history: UserHistory) -> Any:
        return None

    def recommend_session(
        self, context: Any, session: Session, k: int
    ) -> list[RecommendationList]:
        return [
            RecommendationList([session.items[t + 1]]) for t in range(len(session) - 1)
        ]


class Fixed:
    """Always the same list, regardless of the session."""

    def __init__(self, name: str, items: list[int]) -> None:
        self.name = name
        self.items = items

    def user_context(self, history: UserHistory) -> Any:
        return None

    def recommend_session(
        self, context: Any, session: Session, k: int
    ) -> list[RecommendationList]:
        return [RecommendationList(self.items[:k])] * (len(session) - 1)


def brute_force(ranks, k, n):
    hits, recips = [], []
    for r in ranks:
        for j, rank in enumerate(r):
            if n is not None and j >= n:
                break
            hit = 0 < rank <= k
            hits.append(1.0 if hit else 0.0)
            recips.append(1.0 / rank if hit else 0.0)
    if not hits:
        return 0.0, 0.0, 0
    return float(np.mean(hits)), float(np.mean(recips)), len(hits)


class TestSessionRanks:
    def test_ranks_and_misses(self):
        history = UserHistory("u", [], [Session([1, 2, 3, 5], 0)])
        [ranks] = session_ranks(Fixed("f", [3, 2, 1]), history, 3)
        np.testing.assert_array_equal(ranks, [2, 1, 0])

    def test_rank_beyond_k_is_a_miss(self):
        history = UserHistory("u", [], [Session([1, 4], 0)])
        [ranks] = session_ranks(Fixed("f", [1, 2, 3, 4]), history, 2)
        np.testing.assert_array_equal(ranks, [0])

    def test_skips_single_item_sessions(self):
        history = UserHistory("u", [], [Session([1], 0), Session([1, 2], 5)])
        assert len(session_ranks(Oracle(), history, 5)) == 1


class TestEvaluate:
    def test_oracle_is_perfect(self, small_corpus):
        report = evaluate([Oracle()], small_corpus, ks=[1, 5], positions=[1, 2])
        for c in report.cells:
            assert c.recall == 1.0
            assert c.mrr == 1.0

    def test_position_one_counts_test_sessions(self, small_corpus):
        report = evaluate([Oracle()], small_corpus, ks=[5], positions=[1, 20])
        sessions = sum(len(u.test_sessions) for u in small_corpus.users)
        predictions = sum(
            len(s) - 1 for u in small_corpus.users for s in u.test_sessions
        )
        assert report.cell("oracle", 5, 1).count == sessions
        assert report.cell("oracle", 5, "all").count == predictions

    def test_all_matches_longest_position(self, small_corpus):
        model = Fixed("f", [2, 3, 1, 5, 4])
        report = evaluate([model], small_corpus, ks=[2], positions=[20])
        longest = report.cell("f", 2, 20)
        overall = report.cell("f", 2, "all")
        assert (longest.recall, longest.mrr, longest.count) == (
            overall.recall,
            overall.mrr,
            overall.count,
        )

    def test_models_in_order(self, small_corpus):
        report = evaluate(
            [Fixed("b", [1]), Fixed("a", [2])], small_corpus, ks=[1], positions=[1]
        )
        assert report.models == ["b", "a"]

    def test_threads_do_not_change_results(self, small_corpus):
        model = Fixed("f", [5, 3, 1])
        one = evaluate([model], small_corpus, threads=1)
        many = evaluate([model], small_corpus, threads=4)
        assert one == many

    @pytest.mark.parametrize("ks, positions", [([0], [1]), ([5], [0]), ([], [1])])
    def test_bad_arguments(self, small_corpus, ks, positions):
        with pytest.raises(UsageError):
            evaluate([Oracle()], small_corpus, ks=ks, positions=positions)


class TestReportFromRanks:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        ranks = [rng.integers(0, 8, size=rng.integers(1, 12)) for _ in range(30)]
        report = report_from_ranks("m", ranks, [1, 3, 7], [1, 2, 5])
        for k in (1, 3, 7):
            for n in (1, 2, 5, None):
                c = report.cell("m", k, "all" if n is None else n)
                recall, mrr, count = brute_force(ranks, k, n)
                assert c.recall == pytest.approx(recall)
                assert c.mrr == pytest.approx(mrr)
                assert c.count == count

    def test_session_averaging(self):
        ranks = [np.array([1, 0, 0, 0]), np.array([2])]
        report = report_from_ranks("m", ranks, [5], [], average="session")
        c = report.cell("m", 5, "all")
        assert c.recall == pytest.approx((0.25 + 1.0) / 2)
        assert c.mrr == pytest.approx((0.25 + 0.5) / 2)
        assert c.count == 2

    def test_prediction_averaging(self):
        ranks = [np.array([1, 0, 0, 0]), np.array([2])]
        c = report_from_ranks("m", ranks, [5], []).cell("m", 5, "all")
        assert c.recall == pytest.approx(2 / 5)
        assert c.count == 5

    def test_no_sessions(self):
        c = report_from_ranks("m", [], [5], [1]).cell("m", 5, 1)
        assert (c.recall, c.mrr, c.count) == (0.0, 0.0, 0)


class ByCurrentItem:
    """Ranks items by a seeded permutation chosen by the current item."""

    name = "by-current-item"

    def __init__(self, num_items: int, rng: np.random.Generator) -> None:
        self.table = {
            item: (rng.permutation(num_items) + 1).tolist()
            for item in range(1, num_items + 1)
        }

    def user_context(self, history: UserHistory) -> Any:
        return None

    def recommend_session(
        self, context: Any, session: Session, k: int
    ) -> list[RecommendationList]:
        return [
            RecommendationList(self.table[item][:k]) for item in session.items[:-1]
        ]


def random_fixture(corpus_factory, seed):
    rng = np.random.default_rng(seed)
    num_items = int(rng.integers(3, 12))

    def session():
        return rng.integers(1, num_items + 1, size=int(rng.integers(1, 7))).tolist()

    users = {
        f"u{n}": (
            [session()],
            [session() for _ in range(int(rng.integers(1, 6)))],
        )
        for n in range(int(rng.integers(1, 11)))
    }
    return corpus_factory(users, num_items), ByCurrentItem(num_items, rng)


def enumerate_cells(model, corpus, k, n):
    hits, recips = [], []
    for history in corpus.users:
        for session in history.test_sessions:
            for j in range(len(session) - 1):
                if n is not None and j >= n:
                    break
                top = model.table[session.items[j]][:k]
                target = session.items[j + 1]
                hit = target in top
                hits.append(1.0 if hit else 0.0)
                recips.append(1.0 / (top.index(target) + 1) if hit else 0.0)
    if not hits:
        return 0.0, 0.0, 0
    return sum(hits) / len(hits), sum(recips) / len(recips), len(hits)


class TestEvaluateAgainstEnumeration:
    @pytest.mark.parametrize("seed", range(20))
    def test_cells_match(self, corpus_factory, seed):
        corpus, model = random_fixture(corpus_factory, seed)
        report = evaluate([model], corpus, [1, 3, 5], [1, 2, 4])
        for k in (1, 3, 5):
            for n in (1, 2, 4, None):
                c = report.cell(model.name, k, "all" if n is None else n)
                recall, mrr, count = enumerate_cells(model, corpus, k, n)
                assert c.count == count
                assert abs(c.recall - recall) <= 1e-12
                assert abs(c.mrr - mrr) <= 1e-12
