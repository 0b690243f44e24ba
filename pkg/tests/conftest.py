"""Shared test fixtures for iirnn tests."""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np
import pytest

from iirnn.models.corpus import Corpus, ItemVocabulary, Session, UserHistory

type SessionSpec = Sequence[int]
type CorpusFactory = Callable[..., Corpus]


def _sessions(specs: Sequence[SessionSpec], start: int) -> list[Session]:
    return [
        Session(items=list(items), start_time=start + 10_000 * i)
        for i, items in enumerate(specs)
    ]


def build_corpus(
    users: dict[str, tuple[Sequence[SessionSpec], Sequence[SessionSpec]]],
    num_items: int,
) -> Corpus:
    """Corpus with items named i1..iN; train sessions precede test sessions."""
    vocab = ItemVocabulary([f"i{n}" for n in range(1, num_items + 1)])
    vocab.freeze()
    histories = []
    for user, (train, test) in users.items():
        train_sessions = _sessions(train, 0)
        test_sessions = _sessions(test, 10_000 * len(train))
        histories.append(UserHistory(user, train_sessions, test_sessions))
    return Corpus(users=histories, vocab=vocab)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def corpus_factory() -> CorpusFactory:
    return build_corpus


@pytest.fixture
def small_corpus() -> Corpus:
    return build_corpus(
        {
            "alice": ([[1, 2, 3], [2, 3], [1, 4, 5]], [[1, 2], [3, 4, 5]]),
            "bob": ([[4, 5], [5, 1, 2], [2, 3, 4]], [[4, 5, 1]]),
            "carol": ([[3, 1], [1, 2], [2, 5, 3]], [[5, 3, 1, 2]]),
        },
        num_items=5,
    )
