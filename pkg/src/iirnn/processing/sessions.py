from collections.abc import Sequence

from iirnn.errors import IngestionError, UsageError
from iirnn.models.corpus import Interaction, RawSession


def split_into_sessions(
    interactions: Sequence[Interaction], gap_limit: int
) -> list[RawSession]:
    """Segment one user's time-sorted events by inactivity gap.

    Consecutive events belong to the same session iff
    ``t_next <= t_prev + gap_limit``.
    """
    sessions: list[RawSession] = []
    current: RawSession | None = None
    prev: Interaction | None = None
    for event in interactions:
        if prev is not None:
            if event.user != prev.user:
                raise IngestionError(
                    f"mixed users {prev.user!r} and {event.user!r} in one history"
                )
            if event.timestamp < prev.timestamp:
                raise IngestionError(
                    f"interactions of user {event.user!r} are not sorted by time "
                    f"({event.timestamp} after {prev.timestamp})"
                )
        new_session = prev is None or event.timestamp > prev.timestamp + gap_limit
        if new_session or current is None:
            current = RawSession(items=[], timestamps=[])
            sessions.append(current)
        current.items.append(event.item)
        current.timestamps.append(event.timestamp)
        prev = event
    return sessions


def _run_starts(items: Sequence[object]) -> list[int]:
    return [i for i, item in enumerate(items) if i == 0 or item != items[i - 1]]


def collapse_repeats(session: RawSession) -> RawSession:
    """Keep the first event of every run of identical consecutive items."""
    keep = _run_starts(session.items)
    return RawSession(
        items=[session.items[i] for i in keep],
        timestamps=[session.timestamps[i] for i in keep],
    )


def enforce_length(session: RawSession, max_length: int) -> list[RawSession]:
    """l <= L: unchanged; L < l < 2L: split after L events; l >= 2L: dropped."""
    if max_length < 2:
        raise UsageError(f"max session length must be >= 2, got {max_length}")
    n = len(session)
    if n <= max_length:
        return [session]
    if n >= 2 * max_length:
        return []
    return [
        RawSession(session.items[:max_length], session.timestamps[:max_length]),
        RawSession(session.items[max_length:], session.timestamps[max_length:]),
    ]
