import numpy as np
import pytest

from iirnn.errors import IngestionError
from iirnn.models.corpus import Interaction, RawSession
from iirnn.processing import preprocess
from iirnn.processing.split import filter_and_split, hold_one_out_split, train_count
from iirnn.processing.stats import corpus_stats


def sessions(n, length=2, prefix="i", start=0):
    """n sessions of distinct consecutive items, one hour apart."""
    out = []
    for s in range(n):
        items = [f"{prefix}{(s + k) % 7}" for k in range(length)]
        t0 = start + s * 3600
        out.append(RawSession(items, [t0 + k for k in range(length)]))
    return out


class TestTrainCount:
    @pytest.mark.parametrize(
        ("count", "expected"), [(10, 8), (5, 4), (3, 2), (4, 3), (100, 80)]
    )
    def test_rounding(self, count, expected):
        assert train_count(count, 0.8) == expected


class TestFilterAndSplit:
    def test_small_user_removed(self):
        corpus = filter_and_split({"a": sessions(2), "b": sessions(3)})
        assert [u.user for u in corpus.users] == ["b"]

    def test_ten_sessions_split_eight_two(self):
        corpus = filter_and_split({"a": sessions(10)})
        history = corpus.users[0]
        assert len(history.train_sessions) == 8
        assert len(history.test_sessions) == 2
        last_train = max(s.start_time for s in history.train_sessions)
        assert last_train <= min(s.start_time for s in history.test_sessions)

    def test_five_sessions_split_four_one(self):
        history = filter_and_split({"a": sessions(5)}).users[0]
        assert (len(history.train_sessions), len(history.test_sessions)) == (4, 1)

    def test_short_sessions_removed_before_user_filter(self):
        data = sessions(3)
        data[1] = RawSession(["x"], [3600])
        assert filter_and_split({"a": data, "b": sessions(3)}).users[0].user == "b"

    def test_vocabulary_from_training_only(self):
        data = sessions(4, length=2)
        data[-1] = RawSession(["i1", "new", "i2"], [20_000, 20_001, 20_002])
        corpus = filter_and_split({"a": data})
        assert "new" not in corpus.vocab
        test = corpus.users[0].test_sessions[0]
        assert [corpus.vocab.item_of(i) for i in test.items] == ["i1", "i2"]

    def test_test_session_recollapsed_and_dropped(self):
        data = sessions(4, length=2)
        data[-1] = RawSession(["i3", "new", "i3"], [20_000, 20_001, 20_002])
        history = filter_and_split({"a": data}).users[0]
        assert history.test_sessions == []

    def test_dense_ids(self):
        corpus = filter_and_split({"a": sessions(6), "b": sessions(4, prefix="j")})
        ids = {corpus.vocab.id_of(item) for item in corpus.vocab.items()}
        assert ids == set(range(1, len(corpus.vocab) + 1))
        assert corpus.vocab.frozen

    def test_empty_corpus(self):
        with pytest.raises(IngestionError):
            filter_and_split({"a": sessions(1)})


class TestHoldOneOut:
    def test_last_session_only(self):
        corpus = hold_one_out_split(filter_and_split({"a": sessions(10)}))
        history = corpus.users[0]
        assert len(history.train_sessions) == 9
        assert len(history.test_sessions) == 1

    def test_session_count_preserved(self):
        temporal = filter_and_split({"a": sessions(7), "b": sessions(3)})
        holdout = hold_one_out_split(temporal)
        for before, after in zip(temporal.users, holdout.users, strict=True):
            assert len(before.sessions) == len(after.sessions)
            assert before.sessions[-1] == after.test_sessions[0]


def random_log(seed, users=4):
    rng = np.random.default_rng(seed)
    out = []
    for u in range(users):
        t = 0
        for _ in range(int(rng.integers(5, 40))):
            t += int(rng.choice([10, 60, 5000]))
            out.append(Interaction(f"user{u}", f"item{rng.integers(0, 6)}", t))
    return out


class TestPreprocess:
    def test_pipeline_order(self):
        log = []
        for s in range(4):
            base = s * 10_000
            items = ["a", "a", "b", "c"] if s < 3 else list("abcdefgh")
            log += [Interaction("u", it, base + k) for k, it in enumerate(items)]
        corpus, summary = preprocess(log, gap=3600, max_length=4)
        assert summary.long_sessions_dropped == 1
        # three [a, b, c] sessions survive; the 8-item one is dropped
        history = corpus.users[0]
        assert [len(s) for s in history.sessions] == [3, 3, 3]

    @pytest.mark.parametrize("seed", range(100))
    def test_sessions_respect_bounds(self, seed):
        try:
            corpus, _ = preprocess(random_log(seed), gap=3600, max_length=5)
        except IngestionError:
            return
        for history in corpus.users:
            for s in history.sessions:
                assert 2 <= len(s) <= 5
                assert all(a != b for a, b in zip(s.items, s.items[1:], strict=False))

    def test_deterministic(self):
        first, _ = preprocess(random_log(3, users=8), threads=1)
        second, _ = preprocess(random_log(3, users=8), threads=4)
        assert first.users == second.users
        assert first.vocab == second.vocab

    def test_empty_input(self):
        with pytest.raises(IngestionError):
            preprocess([])


class TestCorpusStats:
    def test_hand_tally(self, small_corpus):
        stats = corpus_stats(small_corpus)
        assert stats.num_users == 3
        assert stats.num_sessions == 13
        assert stats.sessions_per_user == pytest.approx(13 / 3)
        assert stats.avg_session_length == pytest.approx(35 / 13)
        assert stats.num_items == 5
