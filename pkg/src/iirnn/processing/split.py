import logging
import math

from iirnn.errors import IngestionError
from iirnn.models.corpus import (
    Corpus,
    ItemVocabulary,
    RawSession,
    Session,
    UserHistory,
)
from iirnn.processing.sessions import collapse_repeats

logger = logging.getLogger(__name__)

MIN_SESSION_LENGTH = 2
MIN_SESSIONS_PER_USER = 3


def train_count(count: int, train_fraction: float) -> int:
    """Sessions assigned to training: ceil(fraction * count), at most count - 1."""
    # rounded so that 0.8 * 5 gives 4 rather than ceil(4.000000000000001)
    return max(0, min(math.ceil(round(train_fraction * count, 9)), count - 1))


def _to_session(raw: RawSession, vocab: ItemVocabulary) -> Session:
    return Session(items=[vocab.id_of(i) for i in raw.items], start_time=raw.start_time)


def _known_only(raw: RawSession, vocab: ItemVocabulary) -> RawSession:
    keep = [i for i, item in enumerate(raw.items) if item in vocab]
    return collapse_repeats(
        RawSession([raw.items[i] for i in keep], [raw.timestamps[i] for i in keep])
    )


def filter_and_split(
    users: dict[str, list[RawSession]],
    train_fraction: float = 0.8,
    min_length: int = MIN_SESSION_LENGTH,
    min_sessions: int = MIN_SESSIONS_PER_USER,
) -> Corpus:
    """Drop short sessions and small users, then split each user in time.

    The vocabulary is built from training sessions only, in first-appearance
    order over users sorted by name. Test events on unseen items are dropped
    and the remaining test session is re-collapsed; it is dropped entirely
    when shorter than ``min_length``.
    """
    kept: dict[str, tuple[list[RawSession], list[RawSession]]] = {}
    dropped_users = 0
    for user in sorted(users):
        sessions = [s for s in users[user] if len(s) >= min_length]
        sessions.sort(key=lambda s: s.start_time)
        if len(sessions) < min_sessions:
            dropped_users += 1
            continue
        n_train = train_count(len(sessions), train_fraction)
        kept[user] = (sessions[:n_train], sessions[n_train:])

    if not kept:
        raise IngestionError("corpus is empty after filtering")

    vocab = ItemVocabulary()
    for train, _ in kept.values():
        for raw in train:
            for item in raw.items:
                vocab.add(item)
    vocab.freeze()

    histories: list[UserHistory] = []
    dropped_events = 0
    dropped_tests = 0
    for user, (train, test) in kept.items():
        history = UserHistory(user=user)
        history.train_sessions = [_to_session(raw, vocab) for raw in train]
        for raw in test:
            known = _known_only(raw, vocab)
            dropped_events += sum(1 for item in raw.items if item not in vocab)
            if len(known) < min_length:
                dropped_tests += 1
                continue
            history.test_sessions.append(_to_session(known, vocab))
        histories.append(history)

    logger.info(
        "Kept %d users (%d dropped), %d items; dropped %d unseen test events "
        "and %d test sessions",
        len(histories),
        dropped_users,
        len(vocab),
        dropped_events,
        dropped_tests,
    )
    return Corpus(users=histories, vocab=vocab)


def hold_one_out_split(corpus: Corpus) -> Corpus:
    """Re-split every user so only the last session is held out."""
    histories = []
    for history in corpus.users:
        sessions = history.sessions
        histories.append(
            UserHistory(
                user=history.user,
                train_sessions=sessions[:-1],
                test_sessions=sessions[-1:],
            )
        )
    return Corpus(users=histories, vocab=corpus.vocab)
