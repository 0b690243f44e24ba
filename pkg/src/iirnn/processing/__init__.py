import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import pandas as pd

from iirnn.errors import IngestionError
from iirnn.models.corpus import Corpus, Interaction, RawSession
from iirnn.processing.sessions import (
    collapse_repeats,
    enforce_length,
    split_into_sessions,
)
from iirnn.processing.split import (
    MIN_SESSION_LENGTH,
    MIN_SESSIONS_PER_USER,
    filter_and_split,
)

logger = logging.getLogger(__name__)


@dataclass
class PreprocessSummary:
    interactions: int = 0
    raw_sessions: int = 0
    long_sessions_split: int = 0
    long_sessions_dropped: int = 0


def _user_sessions(
    events: list[Interaction], gap: int, max_length: int
) -> tuple[list[RawSession], int, int]:
    split = dropped = 0
    out: list[RawSession] = []
    for raw in split_into_sessions(events, gap):
        parts = enforce_length(collapse_repeats(raw), max_length)
        if not parts:
            dropped += 1
        elif len(parts) == 2:
            split += 1
        out.extend(parts)
    return out, split, dropped


def _as_frame(interactions: pd.DataFrame | list[Interaction]) -> pd.DataFrame:
    if isinstance(interactions, pd.DataFrame):
        return interactions
    return pd.DataFrame(
        {
            "user": [i.user for i in interactions],
            "item": [i.item for i in interactions],
            "timestamp": [i.timestamp for i in interactions],
        }
    )


def preprocess(
    interactions: pd.DataFrame | list[Interaction],
    gap: int = 3600,
    max_length: int = 20,
    train_fraction: float = 0.8,
    threads: int | None = None,
) -> tuple[Corpus, PreprocessSummary]:
    """Raw events → sessions → filtered, split and id-mapped corpus.

    Order: segment, collapse repeats, enforce length, drop short sessions,
    drop small users, split.
    """
    frame = _as_frame(interactions)
    summary = PreprocessSummary(interactions=len(frame))
    if frame.empty:
        raise IngestionError("no interactions to preprocess")

    # --- Group ---
    frame = frame.sort_values(["user", "timestamp"], kind="stable")
    per_user: list[list[Interaction]] = [
        [
            Interaction(user=str(user), item=str(item), timestamp=int(ts))
            for item, ts in zip(group["item"], group["timestamp"], strict=True)
        ]
        for user, group in frame.groupby("user", sort=True)
    ]

    # --- Segment ---
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(
            pool.map(lambda ev: _user_sessions(ev, gap, max_length), per_user)
        )

    users: dict[str, list[RawSession]] = {}
    for events, (sessions, split, dropped) in zip(per_user, results, strict=True):
        users[events[0].user] = sessions
        summary.raw_sessions += len(sessions) + dropped - split
        summary.long_sessions_split += split
        summary.long_sessions_dropped += dropped
    logger.info(
        "Segmented %d interactions into %d sessions (%d split, %d dropped as too long)",
        summary.interactions,
        summary.raw_sessions,
        summary.long_sessions_split,
        summary.long_sessions_dropped,
    )

    # --- Filter and split ---
    corpus = filter_and_split(
        users,
        train_fraction=train_fraction,
        min_length=MIN_SESSION_LENGTH,
        min_sessions=MIN_SESSIONS_PER_USER,
    )
    return corpus, summary
