"""Line-oriented corpus file.

::

    #VOCAB<TAB>1<TAB>item-string
    ...
    user<TAB>start_time<TAB>3,1,7        (training sessions, oldest first)
    #TEST
    user<TAB>start_time<TAB>2,5          (test sessions of the same user)

One user block per user; the ``#TEST`` line closes the block's training
section even when the user has no test session.
"""

import logging
from pathlib import Path

from iirnn.errors import FormatError
from iirnn.models.corpus import Corpus, ItemVocabulary, Session, UserHistory

logger = logging.getLogger(__name__)

VOCAB_TAG = "#VOCAB"
TEST_TAG = "#TEST"


def vocabulary_hash(vocab: ItemVocabulary) -> str:
    return vocab.content_hash()


def _check_field(kind: str, value: str) -> None:
    if not value or any(ch in value for ch in "\t\n\r"):
        raise FormatError(f"{kind} {value!r} cannot be written to a corpus file")
    if kind == "user" and value.startswith("#"):
        raise FormatError(f"user {value!r} clashes with the corpus tag syntax")


def _session_line(user: str, session: Session) -> str:
    items = ",".join(str(i) for i in session.items)
    return f"{user}\t{session.start_time}\t{items}\n"


def format_corpus(corpus: Corpus) -> str:
    parts: list[str] = []
    for idx, item in enumerate(corpus.vocab.items(), start=1):
        _check_field("item", item)
        parts.append(f"{VOCAB_TAG}\t{idx}\t{item}\n")
    for history in corpus.users:
        _check_field("user", history.user)
        parts.extend(_session_line(history.user, s) for s in history.train_sessions)
        parts.append(f"{TEST_TAG}\n")
        parts.extend(_session_line(history.user, s) for s in history.test_sessions)
    return "".join(parts)


def write_corpus(corpus: Corpus, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_corpus(corpus))
    logger.info("Wrote corpus with %d users to %s", len(corpus.users), p)
    return p


def _parse_session(line: str, lineno: int, num_items: int) -> tuple[str, Session]:
    fields = line.split("\t")
    if len(fields) != 3:
        raise FormatError(f"line {lineno}: expected 3 tab-separated fields")
    user, start, items = fields
    try:
        ids = [int(tok) for tok in items.split(",")]
        start_time = int(start)
    except ValueError as exc:
        raise FormatError(f"line {lineno}: {exc}") from exc
    if any(not 1 <= i <= num_items for i in ids):
        raise FormatError(f"line {lineno}: item id outside 1..{num_items}")
    return user, Session(items=ids, start_time=start_time)


def read_corpus(path: str | Path) -> Corpus:
    p = Path(path)
    if not p.is_file():
        raise FormatError(f"corpus file not found: {p}")
    vocab_items: list[str] = []
    users: list[UserHistory] = []
    current: UserHistory | None = None
    in_test = False

    with p.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith(VOCAB_TAG + "\t"):
                if users:
                    raise FormatError(f"line {lineno}: vocabulary after sessions")
                parts = line.split("\t", 2)
                if len(parts) != 3:
                    raise FormatError(f"line {lineno}: malformed vocabulary entry")
                _, idx, item = parts
                if not idx.isdigit() or int(idx) != len(vocab_items) + 1:
                    raise FormatError(f"line {lineno}: vocabulary ids must be dense")
                vocab_items.append(item)
                continue
            if line == TEST_TAG:
                if current is None or in_test:
                    raise FormatError(f"line {lineno}: unexpected {TEST_TAG}")
                in_test = True
                continue

            user, session = _parse_session(line, lineno, len(vocab_items))
            if current is None or (in_test and user != current.user):
                current = UserHistory(user=user)
                users.append(current)
                in_test = False
            elif user != current.user:
                raise FormatError(
                    f"line {lineno}: user {user!r} inside the block of "
                    f"{current.user!r} before {TEST_TAG}"
                )
            target = current.test_sessions if in_test else current.train_sessions
            target.append(session)

    if current is not None and not in_test:
        raise FormatError(f"{p}: last user block has no {TEST_TAG} line")
    vocab = ItemVocabulary(vocab_items)
    vocab.freeze()
    return Corpus(users=users, vocab=vocab)
