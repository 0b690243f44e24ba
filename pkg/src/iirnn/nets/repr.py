from collections import deque
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from iirnn.errors import UsageError
from iirnn.numerics.arrays import DenseArray


@dataclass
class SessionRepr:
    """Fixed-width summary of one completed session.

    Average-pooled representations keep their ``items`` so the pooled vector
    can be recomputed from the current embeddings during training.
    """

    vector: DenseArray
    session_start: int
    items: tuple[int, ...] | None = None

    @property
    def width(self) -> int:
        return self.vector.shape[0]


class UserReprBuffer:
    """The ``g`` most recent session representations, oldest first."""

    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise UsageError(f"buffer capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._reprs: deque[SessionRepr] = deque(maxlen=capacity)

    def append(self, rep: SessionRepr) -> None:
        # halves of a split session share a start time
        if self._reprs and rep.session_start < self._reprs[-1].session_start:
            raise UsageError(
                f"session starting at {rep.session_start} is older than "
                f"{self._reprs[-1].session_start}"
            )
        self._reprs.append(rep)

    def clear(self) -> None:
        self._reprs.clear()

    def __len__(self) -> int:
        return len(self._reprs)

    def __iter__(self) -> Iterator[SessionRepr]:
        return iter(self._reprs)

    def __getitem__(self, index: int) -> SessionRepr:
        return self._reprs[index]


def session_repr_avg(
    items: Sequence[int], embeddings: DenseArray, session_start: int = 0
) -> SessionRepr:
    """Mean of the session's item embeddings; independent of item order."""
    if len(items) == 0:
        raise UsageError("cannot represent an empty session")
    ids = np.asarray(items, dtype=np.int64)
    return SessionRepr(
        vector=embeddings[ids].mean(axis=0),
        session_start=session_start,
        items=tuple(int(i) for i in items),
    )


def session_repr_lhs(final_hidden: DenseArray, session_start: int = 0) -> SessionRepr:
    return SessionRepr(vector=np.array(final_hidden), session_start=session_start)
